#include "rouleau/output.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "rouleau/errors.hpp"

namespace rouleau {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + '"';
}

CsvWriter::CsvWriter(const std::string& path, const Meta& meta, const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), ncol_(columns.size()) {
  if (!out_) throw ConfigError("cannot write '" + path + "'");
  for (const auto& [k, v] : meta) out_ << "# " << k << ": " << v << "\r\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << csv_quote(columns[i]);
  out_ << "\r\n";
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != ncol_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    if (auto d = std::get_if<double>(&cells[i])) out_ << format_number(*d);
    else if (auto l = std::get_if<long>(&cells[i])) out_ << *l;
    else out_ << csv_quote(std::get<std::string>(cells[i]));
  }
  out_ << "\r\n";
}

void CsvWriter::close() { out_.close(); }

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

namespace {

std::vector<std::string> split_record(std::istream& in, bool& ok) {
  std::vector<std::string> f;
  std::string cur;
  bool quoted = false, any = false;
  char c;
  ok = false;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cur += '"';
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      break;
    } else if (c == '\n') {
      break;
    } else {
      cur += c;
    }
  }
  if (any) {
    f.push_back(cur);
    ok = true;
  }
  return f;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  CsvTable t;
  while (in.peek() == '#') {
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto p = line.find(": ");
    if (p != std::string::npos) t.meta.emplace_back(line.substr(2, p - 2), line.substr(p + 2));
  }
  bool ok;
  t.columns = split_record(in, ok);
  for (;;) {
    auto r = split_record(in, ok);
    if (!ok) break;
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace rouleau
