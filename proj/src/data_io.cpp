#include "mixdeconv/data_io.hpp"

#include "mixdeconv/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <system_error>
#include <vector>

namespace mixdeconv {

Dataset make_dataset(std::vector<double> values, DataKind kind, std::string source)
{
  if (values.empty())
    throw Error(ErrorCode::empty_dataset, "dataset has no observations");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double y = values[i];
    if (!std::isfinite(y))
      throw Error(ErrorCode::domain_violation,
                  "observation " + std::to_string(i) + " is not finite");
    if (kind == DataKind::count && (y < 0.0 || std::floor(y) != y))
      throw Error(ErrorCode::non_integer_count,
                  "observation " + std::to_string(i) +
                    " is not a nonnegative integer count");
  }
  Dataset d;
  d.values = std::move(values);
  d.kind = kind;
  d.source = std::move(source);
  return d;
}

std::string format_real(double value)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc())
    throw Error(ErrorCode::io_error, "cannot format number");
  return std::string(buf, ptr);
}

std::string read_text_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
  out << text;
  if (!out)
    throw Error(ErrorCode::io_error, "write failed for '" + path.string() + "'");
}

namespace {

struct CsvLine
{
  std::size_t number;
  std::string text;
};

struct CsvFile
{
  std::vector<std::string> notes;
  std::string header;
  std::size_t header_line = 0;
  std::vector<CsvLine> rows;
};

CsvFile read_csv(const std::filesystem::path& path)
{
  const std::string text = read_text_file(path);
  CsvFile file;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (line.front() == '#') {
      file.notes.push_back(line);
      continue;
    }
    if (!have_header) {
      file.header = line;
      file.header_line = number;
      have_header = true;
      continue;
    }
    file.rows.push_back({ number, line });
  }
  if (!have_header || file.rows.empty())
    throw Error(ErrorCode::empty_file, "'" + path.string() + "' has no data rows");
  return file;
}

std::string trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line)
{
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void parse_failure(const std::filesystem::path& path,
                                std::size_t line,
                                const std::string& what)
{
  throw Error(ErrorCode::parse_error,
              path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& field,
                  const std::filesystem::path& path,
                  std::size_t line)
{
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
    parse_failure(path, line, "'" + field + "' is not a finite number");
  return value;
}

std::string normalized_header(const std::string& header)
{
  std::string out;
  for (const auto& f : split_fields(header)) {
    if (!out.empty())
      out += ',';
    std::string field = f;
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"')
      field = field.substr(1, field.size() - 2);
    out += field;
  }
  return out;
}

} // namespace

Dataset load_samples_csv(const std::filesystem::path& path)
{
  const CsvFile file = read_csv(path);
  if (normalized_header(file.header) != "y")
    parse_failure(path, file.header_line, "expected header 'y'");
  std::vector<double> values;
  values.reserve(file.rows.size());
  for (const auto& row : file.rows) {
    const auto fields = split_fields(row.text);
    if (fields.size() != 1)
      parse_failure(path, row.number, "expected exactly one column");
    values.push_back(parse_real(fields[0], path, row.number));
  }
  Dataset d = make_dataset(std::move(values), DataKind::continuous, path.string());
  d.notes = file.notes;
  return d;
}

Dataset load_counts_csv(const std::filesystem::path& path)
{
  const CsvFile file = read_csv(path);
  if (normalized_header(file.header) != "count,frequency")
    parse_failure(path, file.header_line, "expected header 'count,frequency'");
  std::vector<double> values;
  for (const auto& row : file.rows) {
    const auto fields = split_fields(row.text);
    if (fields.size() != 2)
      parse_failure(path, row.number, "expected two columns");
    const double count = parse_real(fields[0], path, row.number);
    const double freq = parse_real(fields[1], path, row.number);
    if (count < 0.0 || std::floor(count) != count)
      throw Error(ErrorCode::non_integer_count,
                  path.string() + ":" + std::to_string(row.number) + ": count '" +
                    fields[0] + "' is not a nonnegative integer");
    if (freq < 0.0)
      throw Error(ErrorCode::negative_frequency,
                  path.string() + ":" + std::to_string(row.number) +
                    ": negative frequency " + fields[1]);
    if (std::floor(freq) != freq)
      throw Error(ErrorCode::non_integer_count,
                  path.string() + ":" + std::to_string(row.number) +
                    ": frequency '" + fields[1] + "' is not an integer");
    values.insert(values.end(), static_cast<std::size_t>(freq), count);
  }
  if (values.empty())
    throw Error(ErrorCode::empty_dataset,
                "'" + path.string() + "' has zero total frequency");
  Dataset d = make_dataset(std::move(values), DataKind::count, path.string());
  d.notes = file.notes;
  return d;
}

Dataset load_dataset_csv(const std::filesystem::path& path)
{
  const CsvFile file = read_csv(path);
  const std::string header = normalized_header(file.header);
  if (header == "y")
    return load_samples_csv(path);
  if (header == "count,frequency")
    return load_counts_csv(path);
  parse_failure(path, file.header_line,
                "unrecognized header '" + file.header +
                  "' (expected 'y' or 'count,frequency')");
}

namespace {

std::string notes_block(const Dataset& data)
{
  std::string out;
  for (const auto& note : data.notes)
    out += note + '\n';
  return out;
}

} // namespace

void save_samples_csv(const Dataset& data, const std::filesystem::path& path)
{
  std::string out = notes_block(data) + "y\n";
  for (double y : data.values)
    out += format_real(y) + '\n';
  write_text_file(path, out);
}

void save_counts_csv(const Dataset& data, const std::filesystem::path& path)
{
  if (data.kind != DataKind::count)
    throw Error(ErrorCode::invalid_config, "only count datasets have a frequency table");
  std::map<long long, long long> table;
  for (double y : data.values)
    ++table[static_cast<long long>(y)];
  std::string out = notes_block(data) + "count,frequency\n";
  for (const auto& [count, freq] : table)
    out += std::to_string(count) + ',' + std::to_string(freq) + '\n';
  write_text_file(path, out);
}

void write_density_csv(const MixingDensity& p, const std::filesystem::path& path)
{
  std::string out = "x,p\n";
  for (std::size_t j = 0; j < p.size(); ++j)
    out += format_real(p.grid().node(j)) + ',' + format_real(p[j]) + '\n';
  write_text_file(path, out);
}

} // namespace mixdeconv
