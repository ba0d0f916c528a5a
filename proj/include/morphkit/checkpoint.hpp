// SPDX-License-Identifier: Apache-2.0
/**
 * @file   checkpoint.hpp
 * @brief  Parameter container I/O.
 *
 * Layout (UTF-8 text, one record per line):
 *
 *     morphkit-params 1
 *     count <n>
 *     param <name> <group> <rank> <dim_0> ... <dim_rank-1>
 *     <numel values as C99 hex floats, space separated>
 *     ... repeated n times
 *
 * Hex floats round-trip doubles bit-exactly.
 */
#ifndef MORPHKIT_CHECKPOINT_HPP
#define MORPHKIT_CHECKPOINT_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "morphkit/autodiff.hpp"

namespace morphkit::ad {

inline constexpr int kParamFormatVersion = 1;

class CheckpointError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void write_params(std::ostream &os, const ParamStore &store);

/// Loads values into an already-constructed store. Every parameter in the
/// store must be present in the stream with an identical shape.
void read_params(std::istream &is, ParamStore &store);

} // namespace morphkit::ad

#endif
