#include "mixdeconv/error.hpp"

namespace mixdeconv {

std::string_view to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::invalid_range: return "invalid-range";
    case ErrorCode::too_few_nodes: return "too-few-nodes";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::domain_violation: return "domain-violation";
    case ErrorCode::empty_dataset: return "empty-dataset";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::zero_likelihood: return "zero-likelihood-observation";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::degenerate_sample: return "degenerate-sample";
    case ErrorCode::discrete_data: return "discrete-data";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::empty_file: return "empty-file";
    case ErrorCode::negative_frequency: return "negative-frequency";
    case ErrorCode::non_integer_count: return "non-integer-count";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::sampler_domain: return "sampler-domain";
  }
  return "unknown";
}

} // namespace mixdeconv
