#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mixdeconv {

enum class DataKind
{
  continuous,
  count
};

//! Observations Y_1..Y_n with their provenance.
//!
//! Count data holds nonnegative integers stored as doubles. `notes` keeps
//! the comment lines of the file the data came from so that saving writes
//! them back.
struct Dataset
{
  std::vector<double> values;
  DataKind kind = DataKind::continuous;
  std::string source;
  std::vector<std::string> notes;

  std::size_t size() const { return values.size(); }
};

//! Validates the Dataset invariants (n >= 1, finite values, counts are
//! nonnegative integers) and returns the assembled object.
Dataset make_dataset(std::vector<double> values,
                     DataKind kind,
                     std::string source = {});

} // namespace mixdeconv
