#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace steinflow::harness {

/// Decimal with 17 significant digits (round-trips every double); "nan",
/// "inf" and "-inf" for non-finite values.
std::string format_real(double value);

/// Minimal CSV writer: comma separated, LF line endings, no quoting (all
/// fields written by this project are numeric).
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  CsvWriter& field(double value);
  CsvWriter& field(std::size_t value);
  CsvWriter& field(std::string_view value);
  void end_row();

 private:
  void separator();

  std::ostream& out_;
  std::size_t columns_;
  std::size_t written_ = 0;
};

}  // namespace steinflow::harness
