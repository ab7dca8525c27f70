#ifndef ROULEAU_OUTPUT_HPP
#define ROULEAU_OUTPUT_HPP

#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace rouleau {

using Meta = std::vector<std::pair<std::string, std::string>>;

// shortest decimal that reads back to the same double
std::string format_number(double x);
std::string csv_quote(const std::string& s);

// RFC 4180 rows with CRLF line ends; metadata goes first as "# key: value" lines.
class CsvWriter {
 public:
  using Cell = std::variant<double, long, std::string>;
  CsvWriter(const std::string& path, const Meta& meta, const std::vector<std::string>& columns);
  void row(const std::vector<Cell>& cells);
  void close();

 private:
  std::ofstream out_;
  std::size_t ncol_;
};

void write_json(const std::string& path, const nlohmann::ordered_json& j);

struct CsvTable {
  Meta meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::string& path);

}  // namespace rouleau

#endif
