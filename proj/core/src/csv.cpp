#include "rar/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace rar {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out = s.substr(b, e - b);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == delim) cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  double v = std::numeric_limits<double>::quiet_NaN();
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "csv: non-numeric or non-finite cell '" << cell << "' at data row " << row + 1
        << ", column " << col + 1;
    throw Error(msg.str());
  }
  return v;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvOptions& options) {
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split(line, options.delimiter);
    if (first && options.header) {
      header = std::move(cells);
      width = header.size();
      first = false;
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      std::ostringstream msg;
      msg << "csv: row " << rows.size() + 1 << " has " << cells.size() << " cells, expected " << width;
      throw Error(msg.str());
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) row[c] = parse_cell(cells[c], rows.size(), c);
    rows.push_back(std::move(row));
    first = false;
  }
  if (width < 2) throw Error("csv: need a response column and at least one predictor column");
  if (rows.size() < 2) throw Error("csv: need at least two data rows");

  std::size_t response = 0;
  if (!options.response.empty()) {
    auto it = std::find(header.begin(), header.end(), options.response);
    if (it != header.end()) {
      response = static_cast<std::size_t>(it - header.begin());
    } else if (all_digits(options.response)) {
      response = static_cast<std::size_t>(std::stoul(options.response));
    } else {
      throw Error("csv: response column '" + options.response + "' not found");
    }
  }
  if (response >= width) throw Error("csv: response column index out of range");

  const Index n = static_cast<Index>(rows.size());
  const Index p = static_cast<Index>(width) - 1;
  Matrix x(n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == response) {
        y[i] = rows[static_cast<std::size_t>(i)][c];
      } else {
        x(i, col++) = rows[static_cast<std::size_t>(i)][c];
      }
    }
  }
  Dataset d = Dataset::make(std::move(x), std::move(y));
  if (!header.empty()) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c != response) d.column_names.push_back(header[c]);
    }
  }
  return d;
}

Dataset read_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("csv: cannot open " + path);
  return parse_csv(in, options);
}

void write_csv(const Dataset& data, std::ostream& out) {
  out << "y";
  for (Index j = 0; j < data.p(); ++j) {
    out << ',';
    if (!data.column_names.empty()) {
      out << data.column_names[static_cast<std::size_t>(j)];
    } else {
      out << 'x' << j + 1;
    }
  }
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < data.n(); ++i) {
    out << data.y[i];
    for (Index j = 0; j < data.p(); ++j) out << ',' << data.x(i, j);
    out << '\n';
  }
}

}  // namespace rar
