#pragma once

#include "mixdeconv/dataset.hpp"
#include "mixdeconv/fixed_point.hpp"

#include <filesystem>
#include <string>

namespace mixdeconv {

// CSV conventions: UTF-8, one header row, "." as decimal separator. Lines
// beginning with '#' are provenance comments; they are kept in
// Dataset::notes and written back on save.

//! Single column "y" of real observations, kept in file order.
Dataset load_samples_csv(const std::filesystem::path& path);

//! Columns "count,frequency" of nonnegative integers. The table is expanded
//! into one observation per unit of frequency, row by row.
Dataset load_counts_csv(const std::filesystem::path& path);

//! Dispatches on the header row: "y" or "count,frequency".
Dataset load_dataset_csv(const std::filesystem::path& path);

void save_samples_csv(const Dataset& data, const std::filesystem::path& path);

//! Writes the frequency table in ascending count order; zero-frequency rows
//! are not written.
void save_counts_csv(const Dataset& data, const std::filesystem::path& path);

//! Two columns x,p.
void write_density_csv(const MixingDensity& p, const std::filesystem::path& path);

//! Shortest decimal text that parses back to the same double.
std::string format_real(double value);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

} // namespace mixdeconv
