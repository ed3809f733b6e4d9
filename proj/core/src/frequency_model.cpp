#include "occupancy/frequency_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <string>

#include "occupancy/rng.hpp"
#include "occupancy/stats.hpp"

namespace occupancy {

double hurwitz_zeta_tail(double s, std::uint64_t a) {
  if (!(s > 1.0)) throw ParameterError("hurwitz_zeta_tail: need s > 1");
  if (a < 1) a = 1;
  // Direct terms until Euler-Maclaurin is safe (x well beyond s).
  std::uint64_t m = std::max<std::uint64_t>({a, 16, static_cast<std::uint64_t>(10.0 * s)});
  KahanSum sum;
  for (std::uint64_t j = a; j < m; ++j) {
    const double t = std::pow(static_cast<double>(j), -s);
    if (t < 1e-320) return sum.value();
    sum.add(t);
  }
  const double x = static_cast<double>(m);
  if (std::pow(x, -s) < 1e-320) return sum.value();
  double tail = std::pow(x, 1.0 - s) / (s - 1.0);
  tail += 0.5 * std::pow(x, -s);
  tail += s * std::pow(x, -s - 1.0) / 12.0;
  tail -= s * (s + 1.0) * (s + 2.0) * std::pow(x, -s - 3.0) / 720.0;
  tail += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * std::pow(x, -s - 5.0) / 30240.0;
  return sum.value() + tail;
}

double riemann_zeta(double s) { return hurwitz_zeta_tail(s, 1); }

struct FrequencyModel::Impl {
  ModelKind kind;

  // geometric
  double q = 0.0;

  // power law: p_j = c j^{-s}, s = 1/alpha
  double alpha = 0.0;
  double c = 0.0;
  double s = 0.0;
  std::once_flag table_once;
  std::vector<double> sample_table;  // cumulative mass, power-law only

  // block: grouped atoms, frequencies strictly decreasing
  std::vector<WeightedAtom> groups;
  std::vector<std::uint64_t> group_idx_end;  // cumulative atom counts
  std::vector<double> group_cum_mass;

  // explicit / stick-breaking: individual atoms; the first sorted_len
  // entries are nonincreasing, extension atoms are appended unsorted
  std::vector<double> freqs;
  std::vector<double> cmass;  // prefix sums of freqs
  std::uint64_t sorted_len = 0;
  double residual = 0.0;

  double listed_mass = 0.0;  // mass of enumerated atoms (residual excluded)

  // stick-breaking continuation state
  double sb_alpha = 0.0;
  double sb_theta = 0.0;
  Rng sb_rng{0};
  std::uint64_t sb_drawn = 0;
  double sb_remaining = 1.0;
  std::vector<double> sticks;
  std::string literal;

  // cached tail moments sum_{j>k} p_j^r for finite kinds
  std::mutex cache_mutex;
  std::uint64_t cache_k = kNoAtom;
  std::vector<double> cache_T;

  bool finite() const { return kind != ModelKind::kGeometric && kind != ModelKind::kPowerLaw; }
  bool grouped() const { return kind == ModelKind::kBlock; }

  std::uint64_t listed_atoms() const {
    if (grouped()) return group_idx_end.empty() ? 0 : group_idx_end.back();
    return freqs.size();
  }

  double frequency(std::uint64_t j) const {
    switch (kind) {
      case ModelKind::kGeometric:
        return (1.0 - q) * std::pow(q, static_cast<double>(j - 1));
      case ModelKind::kPowerLaw:
        return c * std::pow(static_cast<double>(j), -s);
      case ModelKind::kBlock: {
        auto it = std::upper_bound(group_idx_end.begin(), group_idx_end.end(), j - 1);
        if (it == group_idx_end.end()) throw ParameterError("frequency: index beyond atoms");
        return groups[static_cast<std::size_t>(it - group_idx_end.begin())].p;
      }
      default:
        if (j == 0 || j > freqs.size()) throw ParameterError("frequency: index beyond atoms");
        return freqs[j - 1];
    }
  }

  // #{j : p_j >= x} (strict=false) or #{j : p_j > x} (strict=true)
  std::uint64_t count_at_least(double x, bool strict) const {
    if (!(x > 0.0)) throw ParameterError("tail_count: need x > 0");
    switch (kind) {
      case ModelKind::kGeometric: {
        const double p1 = 1.0 - q;
        if (strict ? x >= p1 : x > p1) return 0;
        double guess = std::floor(std::log(x / p1) / std::log(q)) + 1.0;
        std::uint64_t j = guess < 1.0 ? 1 : static_cast<std::uint64_t>(guess);
        auto in = [&](std::uint64_t i) {
          const double p = frequency(i);
          return strict ? p > x : p >= x;
        };
        while (in(j + 1)) ++j;
        while (j > 0 && !in(j)) --j;
        return j;
      }
      case ModelKind::kPowerLaw: {
        if (strict ? x >= c : x > c) return 0;
        double guess = std::floor(std::pow(c / x, alpha));
        std::uint64_t j = guess < 1.0 ? 1 : static_cast<std::uint64_t>(guess);
        auto in = [&](std::uint64_t i) {
          const double p = frequency(i);
          return strict ? p > x : p >= x;
        };
        while (in(j + 1)) ++j;
        while (j > 0 && !in(j)) --j;
        return j;
      }
      case ModelKind::kBlock: {
        std::uint64_t n = 0;
        for (const auto& g : groups) {
          if (strict ? g.p > x : g.p >= x) n += g.count;
        }
        return n;
      }
      default: {
        auto cmp = [&](double p) { return strict ? p > x : p >= x; };
        // sorted block: binary search for first element failing cmp
        auto begin = freqs.begin();
        auto sorted_end = freqs.begin() + static_cast<std::ptrdiff_t>(sorted_len);
        auto it = std::partition_point(begin, sorted_end, cmp);
        std::uint64_t n = static_cast<std::uint64_t>(it - begin);
        for (auto e = sorted_end; e != freqs.end(); ++e) {
          if (cmp(*e)) ++n;
        }
        return n;
      }
    }
  }

  double tail_sum(std::uint64_t k) const {
    switch (kind) {
      case ModelKind::kGeometric:
        return std::pow(q, static_cast<double>(k));
      case ModelKind::kPowerLaw:
        return c * hurwitz_zeta_tail(s, k + 1);
      default: {
        const std::uint64_t n = listed_atoms();
        if (k >= n) return residual;
        if (grouped()) {
          // sum beyond atom index k
          double sum = residual;
          std::uint64_t before = 0;
          for (std::size_t g = 0; g < groups.size(); ++g) {
            const std::uint64_t end = group_idx_end[g];
            if (end <= k) {
              before = end;
              continue;
            }
            const std::uint64_t inside = end - std::max(before, k);
            sum += static_cast<double>(inside) * groups[g].p;
            before = end;
          }
          return sum;
        }
        return k == 0 ? listed_mass + residual : listed_mass - cmass[k - 1] + residual;
      }
    }
  }

  double cum_mass(std::uint64_t j) const {
    if (j == 0) return 0.0;
    switch (kind) {
      case ModelKind::kGeometric:
        return -std::expm1(static_cast<double>(j) * std::log(q));  // 1 - q^j
      case ModelKind::kPowerLaw:
        return 1.0 - tail_sum(j);
      case ModelKind::kBlock: {
        auto it = std::upper_bound(group_idx_end.begin(), group_idx_end.end(), j - 1);
        if (it == group_idx_end.end()) return listed_mass;
        const std::size_t g = static_cast<std::size_t>(it - group_idx_end.begin());
        const double base = g == 0 ? 0.0 : group_cum_mass[g - 1];
        const std::uint64_t start = g == 0 ? 0 : group_idx_end[g - 1];
        return base + static_cast<double>(j - start) * groups[g].p;
      }
      default:
        if (j > freqs.size()) return listed_mass;
        return cmass[j - 1];
    }
  }

  // sum_{j>k} p_j^r, with the residual treated as one virtual atom
  double tail_moment_raw(int r, std::uint64_t k) const {
    if (r < 1) throw ParameterError("tail_moment: need r >= 1");
    switch (kind) {
      case ModelKind::kGeometric: {
        const double lq = std::log(q);
        const double num = std::exp(static_cast<double>(r) * (std::log1p(-q) + static_cast<double>(k) * lq));
        const double den = -std::expm1(static_cast<double>(r) * lq);
        return num / den;
      }
      case ModelKind::kPowerLaw: {
        const double cr = std::exp(static_cast<double>(r) * std::log(c));
        if (cr == 0.0) return 0.0;
        return cr * hurwitz_zeta_tail(static_cast<double>(r) * s, k + 1);
      }
      default: {
        double rp = residual > 0.0 ? std::pow(residual, static_cast<double>(r)) : 0.0;
        KahanSum sum;
        if (grouped()) {
          std::uint64_t before = 0;
          for (std::size_t g = 0; g < groups.size(); ++g) {
            const std::uint64_t end = group_idx_end[g];
            if (end > k) {
              const std::uint64_t inside = end - std::max(before, k);
              sum.add(static_cast<double>(inside) * std::pow(groups[g].p, static_cast<double>(r)));
            }
            before = end;
          }
        } else {
          for (std::uint64_t j = k; j < freqs.size(); ++j) {
            sum.add(std::pow(freqs[j], static_cast<double>(r)));
          }
        }
        return sum.value() + rp;
      }
    }
  }

  double tail_moment(int r, std::uint64_t k) {
    if (r == 1) {
      // exact complement of the prefix mass
      if (finite()) {
        const std::uint64_t n = listed_atoms();
        if (k >= n) return residual;
        return listed_mass - cum_mass(k) + residual;
      }
      return tail_sum(k);
    }
    if (!finite()) return tail_moment_raw(r, k);
    // finite kinds: one pass fills the cache for r = 2..kCacheMax
    constexpr int kCacheMax = 80;
    if (r > kCacheMax) return tail_moment_raw(r, k);
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (cache_k != k || cache_T.empty()) {
      cache_T.assign(kCacheMax + 1, 0.0);
      std::vector<KahanSum> acc(kCacheMax + 1);
      auto feed = [&](double p, double count) {
        double pw = p;
        for (int rr = 2; rr <= kCacheMax; ++rr) {
          pw *= p;
          if (pw == 0.0) break;
          acc[static_cast<std::size_t>(rr)].add(count * pw);
        }
      };
      if (grouped()) {
        std::uint64_t before = 0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
          const std::uint64_t end = group_idx_end[g];
          if (end > k) feed(groups[g].p, static_cast<double>(end - std::max(before, k)));
          before = end;
        }
      } else {
        for (std::uint64_t j = k; j < freqs.size(); ++j) feed(freqs[j], 1.0);
      }
      if (residual > 0.0) feed(residual, 1.0);
      for (int rr = 2; rr <= kCacheMax; ++rr) {
        cache_T[static_cast<std::size_t>(rr)] = acc[static_cast<std::size_t>(rr)].value();
      }
      cache_k = k;
    }
    return cache_T[static_cast<std::size_t>(r)];
  }

  void extend_stick(double target) {
    if (kind != ModelKind::kStickBreaking) return;
    bool grew = false;
    while (sb_remaining > target && freqs.size() < FrequencyModel::kExtensionCap) {
      ++sb_drawn;
      const double b = sb_rng.beta(1.0 - sb_alpha, sb_theta + static_cast<double>(sb_drawn) * sb_alpha);
      const double next_remaining = sb_remaining * (1.0 - b);
      const double w = sb_remaining - next_remaining;  // telescoping keeps the total exact
      sb_remaining = next_remaining;
      sticks.push_back(w);
      freqs.push_back(w);
      cmass.push_back((cmass.empty() ? 0.0 : cmass.back()) + w);
      grew = true;
    }
    if (grew) {
      residual = sb_remaining;
      listed_mass = cmass.back();
      std::lock_guard<std::mutex> lock(cache_mutex);
      cache_k = kNoAtom;
      cache_T.clear();
    }
  }
};

namespace {

std::shared_ptr<FrequencyModel::Impl> make_impl(ModelKind kind) {
  auto impl = std::make_shared<FrequencyModel::Impl>();
  impl->kind = kind;
  return impl;
}

void build_prefix(FrequencyModel::Impl& impl) {
  if (impl.grouped()) {
    impl.group_idx_end.clear();
    impl.group_cum_mass.clear();
    std::uint64_t n = 0;
    KahanSum mass;
    for (const auto& g : impl.groups) {
      n += g.count;
      mass.add(static_cast<double>(g.count) * g.p);
      impl.group_idx_end.push_back(n);
      impl.group_cum_mass.push_back(mass.value());
    }
    impl.listed_mass = mass.value();
  } else {
    impl.cmass.resize(impl.freqs.size());
    KahanSum mass;
    for (std::size_t i = 0; i < impl.freqs.size(); ++i) {
      mass.add(impl.freqs[i]);
      impl.cmass[i] = mass.value();
    }
    impl.listed_mass = impl.freqs.empty() ? 0.0 : impl.cmass.back();
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

FrequencyModel FrequencyModel::geometric(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("geometric: need q in (0,1)");
  auto impl = make_impl(ModelKind::kGeometric);
  impl->q = q;
  impl->listed_mass = 1.0;
  impl->literal = "geometric:q=" + format_double(q);
  return FrequencyModel(std::move(impl));
}

FrequencyModel FrequencyModel::power_law(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("power_law: need alpha in (0,1)");
  auto impl = make_impl(ModelKind::kPowerLaw);
  impl->alpha = alpha;
  impl->s = 1.0 / alpha;
  impl->c = 1.0 / riemann_zeta(impl->s);
  impl->listed_mass = 1.0;
  impl->literal = "powerlaw:alpha=" + format_double(alpha);
  return FrequencyModel(std::move(impl));
}

FrequencyModel FrequencyModel::block(BlockSpec spec) {
  if (spec.atoms.empty()) throw ParameterError("block: empty spec");
  for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
    const auto& a = spec.atoms[i];
    if (!(a.p > 0.0 && a.p < 1.0)) throw ParameterError("block: frequencies must lie in (0,1)");
    if (a.count == 0) throw ParameterError("block: zero multiplicity");
    if (i > 0 && !(a.p < spec.atoms[i - 1].p)) {
      throw ParameterError("block: frequencies must be strictly decreasing");
    }
  }
  auto impl = make_impl(ModelKind::kBlock);
  impl->groups = std::move(spec.atoms);
  build_prefix(*impl);
  if (!std::isfinite(impl->listed_mass)) throw ParameterError("block: infinite total mass");
  impl->literal = "block:custom";
  return FrequencyModel(std::move(impl));
}

FrequencyModel FrequencyModel::block_preset(BlockPreset preset, int depth) {
  BlockSpec spec;
  std::string name;
  switch (preset) {
    case BlockPreset::kEx10: {
      name = "ex10";
      const double q = 0.4;
      const int d = depth > 0 ? depth : 25;
      for (int i = 1; i <= d; ++i) {
        spec.atoms.push_back({std::pow(q, i), static_cast<std::uint64_t>(i)});
      }
      break;
    }
    case BlockPreset::kEx11: {
      name = "ex11";
      const int d = std::min(depth > 0 ? depth : 6, 9);
      for (int i = 1; i <= d; ++i) {
        spec.atoms.push_back({std::exp2(-std::exp2(i)), static_cast<std::uint64_t>(i)});
      }
      break;
    }
    case BlockPreset::kEx12: {
      name = "ex12";
      const int d = std::min(depth > 0 ? depth : 5, 5);
      for (int i = 1; i <= d; ++i) {
        spec.atoms.push_back({std::exp2(-std::exp2(i + 1)),
                              std::uint64_t{1} << (std::uint64_t{1} << i)});
      }
      break;
    }
  }
  FrequencyModel m = block(std::move(spec));
  m.impl_->literal = "block:preset=" + name;
  return m;
}

FrequencyModel FrequencyModel::from_frequencies(std::vector<double> p, double residual) {
  if (p.empty()) throw ParameterError("explicit: empty frequency list");
  if (!(residual >= 0.0)) throw ParameterError("explicit: negative residual");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0)) throw ParameterError("explicit: frequencies must be positive");
    if (i > 0 && p[i] > p[i - 1]) throw ParameterError("explicit: frequencies must be nonincreasing");
  }
  auto impl = make_impl(ModelKind::kExplicit);
  impl->freqs = std::move(p);
  impl->sorted_len = impl->freqs.size();
  impl->residual = residual;
  build_prefix(*impl);
  if (!std::isfinite(impl->listed_mass + residual)) throw ParameterError("explicit: infinite mass");
  impl->literal = "explicit:inline";
  return FrequencyModel(std::move(impl));
}

FrequencyModel FrequencyModel::stick_breaking(double alpha, double theta, std::uint64_t seed,
                                              std::uint64_t depth) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("stick_breaking: need alpha in [0,1)");
  if (!(theta > -alpha)) throw ParameterError("stick_breaking: need theta > -alpha");
  if (depth == 0 || depth > kExtensionCap) throw ParameterError("stick_breaking: bad depth");
  auto impl = make_impl(ModelKind::kStickBreaking);
  impl->sb_alpha = alpha;
  impl->sb_theta = theta;
  impl->sb_rng = Rng::stream(seed, 0x6765u /* "ge" */);
  impl->sb_remaining = 1.0;
  impl->sticks.reserve(depth);
  for (std::uint64_t i = 1; i <= depth; ++i) {
    const double b = impl->sb_rng.beta(1.0 - alpha, theta + static_cast<double>(i) * alpha);
    const double next_remaining = impl->sb_remaining * (1.0 - b);
    impl->sticks.push_back(impl->sb_remaining - next_remaining);
    impl->sb_remaining = next_remaining;
  }
  impl->sb_drawn = depth;
  impl->residual = impl->sb_remaining;
  impl->freqs = impl->sticks;
  std::sort(impl->freqs.begin(), impl->freqs.end(), std::greater<double>());
  impl->sorted_len = impl->freqs.size();
  build_prefix(*impl);
  impl->literal = "gem:alpha=" + format_double(alpha) + ",theta=" + format_double(theta) +
                  ",seed=" + std::to_string(seed) + ",depth=" + std::to_string(depth);
  return FrequencyModel(std::move(impl));
}

ModelKind FrequencyModel::kind() const { return impl_->kind; }

double FrequencyModel::total_mass() const { return impl_->listed_mass + impl_->residual; }

bool FrequencyModel::normalized(double tol) const { return std::fabs(total_mass() - 1.0) <= tol; }

bool FrequencyModel::has_infinite_support() const { return !impl_->finite(); }

double FrequencyModel::residual_mass() const { return impl_->residual; }

std::uint64_t FrequencyModel::atom_count() const {
  if (!impl_->finite()) throw UnsupportedError("atom_count: infinite support");
  return impl_->listed_atoms();
}

double FrequencyModel::frequency(std::uint64_t j) const {
  if (j == 0) throw ParameterError("frequency: indices are 1-based");
  return impl_->frequency(j);
}

double FrequencyModel::top_frequency() const {
  if (!impl_->finite() || impl_->sorted_len == impl_->listed_atoms() || impl_->grouped()) {
    return impl_->frequency(1);
  }
  double top = impl_->freqs.empty() ? 0.0 : impl_->freqs.front();
  for (double p : impl_->freqs) top = std::max(top, p);
  return top;
}

double FrequencyModel::cum_mass(std::uint64_t j) const { return impl_->cum_mass(j); }

double FrequencyModel::tail_sum(std::uint64_t k) const {
  if (!impl_->finite()) return impl_->tail_sum(k);
  const std::uint64_t n = impl_->listed_atoms();
  if (k >= n) return impl_->residual;
  return impl_->listed_mass - impl_->cum_mass(k) + impl_->residual;
}

double FrequencyModel::tail_moment(int r, std::uint64_t k) const { return impl_->tail_moment(r, k); }

std::uint64_t FrequencyModel::tail_count(double x) const { return impl_->count_at_least(x, false); }

double FrequencyModel::nu_r_mass(int r, double x) const {
  if (r < 1) throw ParameterError("nu_r_mass: need r >= 1");
  if (!(x > 0.0)) throw ParameterError("nu_r_mass: need x > 0");
  const std::uint64_t above = impl_->count_at_least(x, true);
  return impl_->tail_moment(r, above);
}

std::int64_t FrequencyModel::delta_nu(double x) const {
  if (!(x > 0.0)) throw ParameterError("delta_nu: need x > 0");
  return static_cast<std::int64_t>(impl_->count_at_least(x / 2.0, false)) -
         static_cast<std::int64_t>(impl_->count_at_least(x, false));
}

std::uint64_t FrequencyModel::head_atoms(double weight, double theta,
                                         std::vector<WeightedAtom>& out) const {
  out.clear();
  if (!(weight > 0.0) || !(theta > 0.0)) throw ParameterError("head_atoms: bad arguments");
  const double pth = theta / weight;
  const std::uint64_t j_head = impl_->count_at_least(pth, true);
  constexpr std::uint64_t kHeadCap = 50'000'000;
  if (j_head > kHeadCap) throw AccuracyError("head_atoms: truncation head too large");
  switch (impl_->kind) {
    case ModelKind::kGeometric:
    case ModelKind::kPowerLaw:
      out.reserve(j_head);
      for (std::uint64_t j = 1; j <= j_head; ++j) out.push_back({impl_->frequency(j), 1});
      break;
    case ModelKind::kBlock: {
      for (const auto& g : impl_->groups) {
        if (g.p > pth) out.push_back(g);
      }
      break;
    }
    default: {
      // head = every listed atom above the threshold; extension block scanned too
      for (double p : impl_->freqs) {
        if (p > pth) out.push_back({p, 1});
      }
      break;
    }
  }
  return j_head;
}

std::uint64_t FrequencyModel::index_at_mass(double u) const {
  if (!(u >= 0.0) || u >= total_mass()) throw ParameterError("index_at_mass: u out of range");
  switch (impl_->kind) {
    case ModelKind::kGeometric: {
      // smallest j with 1 - q^j > u
      double guess = std::floor(std::log1p(-u) / std::log(impl_->q)) + 1.0;
      std::uint64_t j = guess < 1.0 ? 1 : static_cast<std::uint64_t>(guess);
      while (j > 1 && impl_->cum_mass(j - 1) > u) --j;
      while (!(impl_->cum_mass(j) > u)) ++j;
      return j;
    }
    case ModelKind::kPowerLaw: {
      auto& table = impl_->sample_table;
      std::call_once(impl_->table_once, [this] {
        constexpr std::size_t kTable = std::size_t{1} << 20;
        auto& t = impl_->sample_table;
        t.resize(kTable);
        KahanSum cum;
        for (std::size_t j = 0; j < kTable; ++j) {
          cum.add(impl_->frequency(j + 1));
          t[j] = cum.value();
        }
      });
      if (u < table.back()) {
        auto it = std::upper_bound(table.begin(), table.end(), u);
        return static_cast<std::uint64_t>(it - table.begin()) + 1;
      }
      // closed-form bracket search beyond the table
      std::uint64_t lo = table.size();  // cum(lo) <= u (up to the seam)
      std::uint64_t hi = 2 * lo;
      while (!(impl_->cum_mass(hi) > u)) {
        lo = hi;
        hi *= 2;
        if (hi > (std::uint64_t{1} << 60)) throw AccuracyError("index_at_mass: bracket overflow");
      }
      while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (impl_->cum_mass(mid) > u) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return hi;
    }
    case ModelKind::kBlock: {
      const auto& cm = impl_->group_cum_mass;
      auto it = std::upper_bound(cm.begin(), cm.end(), u);
      if (it == cm.end()) return kNoAtom;
      const std::size_t g = static_cast<std::size_t>(it - cm.begin());
      const double base = g == 0 ? 0.0 : cm[g - 1];
      const std::uint64_t start = g == 0 ? 0 : impl_->group_idx_end[g - 1];
      std::uint64_t off = static_cast<std::uint64_t>((u - base) / impl_->groups[g].p);
      off = std::min(off, impl_->groups[g].count - 1);
      return start + off + 1;
    }
    default: {
      const auto& cm = impl_->cmass;
      auto it = std::upper_bound(cm.begin(), cm.end(), u);
      if (it == cm.end()) return kNoAtom;
      return static_cast<std::uint64_t>(it - cm.begin()) + 1;
    }
  }
}

void FrequencyModel::ensure_residual_below(double target) const { impl_->extend_stick(target); }

const std::vector<double>& FrequencyModel::realized_sticks() const {
  if (impl_->kind != ModelKind::kStickBreaking) {
    throw UnsupportedError("realized_sticks: not a stick-breaking model");
  }
  return impl_->sticks;
}

std::string FrequencyModel::describe() const { return impl_->literal; }

}  // namespace occupancy
