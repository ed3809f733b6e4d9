#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace occupancy {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Parameter outside its admissible domain.
struct ParameterError : Error {
  using Error::Error;
};
/// Fixed-n operation applied to a model that is not a probability
/// distribution (or vice versa).
struct SchemeError : Error {
  using Error::Error;
};
/// A realized model ran out of atoms (lazy-extension cap reached).
struct DepthExhaustedError : Error {
  using Error::Error;
};
/// Requested accuracy or enumeration guard cannot be met.
struct AccuracyError : Error {
  using Error::Error;
};
struct UnsupportedError : Error {
  using Error::Error;
};

enum class ModelKind {
  kGeometric,
  kPowerLaw,
  kBlock,
  kExplicit,
  kStickBreaking,
};

/// One frequency value with its multiplicity. Block models carry huge
/// multiplicities, so all bulk evaluation is done on grouped atoms.
struct WeightedAtom {
  double p = 0.0;
  std::uint64_t count = 0;
};

struct BlockSpec {
  std::vector<WeightedAtom> atoms;  // frequencies strictly decreasing
};

enum class BlockPreset { kEx10, kEx11, kEx12 };

inline constexpr std::uint64_t kNoAtom = std::numeric_limits<std::uint64_t>::max();

/// A nonincreasing positive frequency sequence (p_j) together with the
/// counting measure nu it induces. Immutable and cheap to copy (shared
/// state). The stick-breaking kind is frozen at realization: same seed
/// and depth give the same atoms, and the unrealized remainder is kept
/// as an explicit residual mass.
class FrequencyModel {
 public:
  // p_j = (1-q) q^{j-1}
  static FrequencyModel geometric(double q);
  // p_j = c j^{-1/alpha} with c = 1/zeta(1/alpha); total mass 1 and
  // tail_count(x) = floor((c/x)^alpha) in closed form.
  static FrequencyModel power_law(double alpha);
  static FrequencyModel block(BlockSpec spec);
  static FrequencyModel block_preset(BlockPreset preset, int depth = 6);
  // Frequencies listed nonincreasing; residual >= 0 is the mass of an
  // implicit tail beyond the listed atoms.
  static FrequencyModel from_frequencies(std::vector<double> p, double residual = 0.0);
  // GEM(alpha, theta) residual-allocation realization; needs theta > -alpha,
  // 0 <= alpha < 1. Atoms are sorted nonincreasing at realization; the
  // model can later be extended deterministically (same stream) up to a
  // hard cap, which is the lazy-extension mechanism used by the sampler.
  static FrequencyModel stick_breaking(double alpha, double theta, std::uint64_t seed,
                                       std::uint64_t depth);

  ModelKind kind() const;
  double total_mass() const;  // includes residual
  bool normalized(double tol = 1e-9) const;
  bool has_infinite_support() const;  // geometric / power-law
  double residual_mass() const;
  /// Number of realized atoms for finite-support kinds.
  std::uint64_t atom_count() const;

  /// p_j, 1-based. Throws beyond the realized atoms of a finite model.
  double frequency(std::uint64_t j) const;
  /// Largest frequency.
  double top_frequency() const;
  /// sum_{i<=j} p_i (residual excluded).
  double cum_mass(std::uint64_t j) const;
  /// sum_{j>k} p_j (residual included).
  double tail_sum(std::uint64_t k) const;
  /// sum_{j>k} p_j^r; residual mass is attributed to a single virtual
  /// atom for r = 1 and ignored for r > 1.
  double tail_moment(int r, std::uint64_t k) const;

  /// nu_bar(x) = #{j : p_j >= x}, exact.
  std::uint64_t tail_count(double x) const;
  /// nu_r[0, x] = sum_{p_j <= x} p_j^r.
  double nu_r_mass(int r, double x) const;
  /// grad nu(x) = nu_bar(x/2) - nu_bar(x), the count of frequencies in [x/2, x).
  std::int64_t delta_nu(double x) const;

  /// Grouped atoms covering indices 1..J where J is the smallest index
  /// with weight * p_{J+1} <= theta (or the end of a finite model).
  /// Returns J; tail moments relative to this J come from tail_moment.
  std::uint64_t head_atoms(double weight, double theta, std::vector<WeightedAtom>& out) const;

  /// Smallest j with cum_mass(j) > u, or kNoAtom if u falls in the
  /// residual mass. u must lie in [0, total_mass()).
  std::uint64_t index_at_mass(double u) const;

  /// For stick-breaking models: extend the realization until the
  /// residual drops below target (subject to the hard atom cap). Not
  /// thread-safe; call before sharing the model across workers. No-op
  /// for other kinds.
  void ensure_residual_below(double target) const;
  static constexpr std::uint64_t kExtensionCap = std::uint64_t{1} << 24;

  /// Stick lengths in realization (size-biased) order, for stick-breaking
  /// models only; exposed for distributional checks.
  const std::vector<double>& realized_sticks() const;

  /// Human-readable literal, parseable by parse_model_literal.
  std::string describe() const;

  struct Impl;

 private:
  explicit FrequencyModel(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<Impl> impl_;
};

/// zeta(s) for s > 1, via direct summation plus an Euler-Maclaurin tail.
double riemann_zeta(double s);
/// sum_{j >= a} j^{-s} for s > 1, a >= 1.
double hurwitz_zeta_tail(double s, std::uint64_t a);

}  // namespace occupancy
