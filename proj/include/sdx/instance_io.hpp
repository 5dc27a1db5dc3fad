#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "sdx/bqpwalk.hpp"
#include "sdx/quadmodel.hpp"

namespace sdx::io {

/// Unreadable file, malformed JSON (with line and column) or a bad key.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AnyInstance = std::variant<bqp::BqpInstance, QcqpInstance>;

/// BQP shorthand {"n", "c", "coff", optional "cdiag"} or the general form
/// {"n", "objective": {"C", "c"}, "constraints": [{"A", "a", "alpha"}]},
/// symmetric matrices given as the upper triangle in row-major order.
AnyInstance parse_instance(std::string_view text);
AnyInstance read_instance_file(const std::string& path);

/// "c=5,-1;coff=3" with an optional ";cdiag=..." part.
bqp::BqpInstance parse_inline(std::string_view spec);

std::string to_json(const bqp::BqpInstance& inst);
std::string to_json(const QcqpInstance& inst);
std::string to_json(const AnyInstance& inst);

/// The general QCQP view (x_i^2 - 1 = 0 constraints for a BQP).
QcqpInstance as_qcqp(const AnyInstance& inst);

}  // namespace sdx::io
