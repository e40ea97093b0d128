#pragma once

#include <iosfwd>
#include <string>

#include "rar/core_model.hpp"

namespace rar {

struct CsvOptions {
  bool header = true;
  /// Response column: a header name, or a 0-based index written as digits. Empty means column 0.
  std::string response;
  char delimiter = ',';
};

/// Reads a numeric CSV. The response column becomes y, every other column becomes x.
/// Empty or non-finite cells are hard errors.
Dataset parse_csv(std::istream& in, const CsvOptions& options = {});
Dataset read_csv(const std::string& path, const CsvOptions& options = {});

/// Writes y as the first column followed by x, with a header row.
void write_csv(const Dataset& data, std::ostream& out);

}  // namespace rar
