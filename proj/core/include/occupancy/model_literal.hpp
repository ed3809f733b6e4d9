#pragma once

#include <string>

#include "occupancy/frequency_model.hpp"

namespace occupancy {

/// Builds a model from a literal of one of the forms
///   geometric:q=0.5
///   powerlaw:alpha=0.5
///   block:preset=ex10|ex11|ex12[,depth=D]
///   block:file=PATH            (JSON array of {"q": freq, "m": count})
///   gem:alpha=A,theta=T,seed=S,depth=D
///   explicit:file=PATH         (one frequency per line, nonincreasing;
///                               '#' starts a comment)
/// Throws ParameterError on malformed input.
FrequencyModel parse_model_literal(const std::string& literal);

}  // namespace occupancy
