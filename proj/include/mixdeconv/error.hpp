#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixdeconv {

//! Machine-readable failure categories shared by every module.
enum class ErrorCode
{
  invalid_range,
  too_few_nodes,
  length_mismatch,
  invalid_parameter,
  domain_violation,
  empty_dataset,
  dimension_mismatch,
  zero_likelihood,
  invalid_config,
  degenerate_sample,
  discrete_data,
  parse_error,
  empty_file,
  negative_frequency,
  non_integer_count,
  io_error,
  sampler_domain,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message)
    , code_(code)
  {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace mixdeconv
