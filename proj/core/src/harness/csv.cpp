#include "steinflow/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace steinflow::harness {

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  for (const auto& h : header) field(std::string_view(h));
  end_row();
}

void CsvWriter::separator() {
  if (written_ > 0) out_ << ',';
  ++written_;
}

CsvWriter& CsvWriter::field(double value) {
  separator();
  out_ << format_real(value);
  return *this;
}

CsvWriter& CsvWriter::field(std::size_t value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::field(std::string_view value) {
  separator();
  out_ << value;
  return *this;
}

void CsvWriter::end_row() {
  if (written_ != columns_) throw std::logic_error("CSV row has the wrong number of fields");
  out_ << '\n';
  written_ = 0;
}

}  // namespace steinflow::harness
