#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "surfrec/harness.hpp"

namespace surfrec {

namespace {

void append_number(std::string& out, double x) {
  if (std::isnan(x)) return;  // empty field
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 16);
  out.append(buf, ptr);
}

void append_field(std::string& out, std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    out += s;
    return;
  }
  out += '"';
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

std::vector<std::vector<std::string>> split_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        fields.push_back(std::move(field));
        records.push_back(std::move(fields));
      }
      fields.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw IoError("CSV: unterminated quoted field");
  if (any || !field.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  return records;
}

double parse_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw IoError("CSV: cannot parse number '" + s + "'");
  return v;
}

template <typename T>
T parse_integer(const std::string& s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw IoError("CSV: cannot parse integer '" + s + "'");
  return v;
}

}  // namespace

std::string to_csv(const ConvergenceTable& table) {
  std::string out = "level,dof,h";
  for (const auto& c : table.columns) {
    out += ',';
    append_field(out, c);
    out += ',';
    append_field(out, c + "_order");
  }
  out += ",tag\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.level) + ',' + std::to_string(r.dof) + ',';
    append_number(out, r.h);
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
      out += ',';
      append_number(out, r.errors[k]);
      out += ',';
      append_number(out, r.orders[k]);
    }
    out += ',';
    append_field(out, r.tag);
    out += '\n';
  }
  return out;
}

ConvergenceTable parse_csv(std::string_view text) {
  const auto records = split_records(text);
  if (records.empty()) throw IoError("CSV: missing header");
  const auto& head = records[0];
  if (head.size() < 4 || head[0] != "level" || head[1] != "dof" || head[2] != "h" || head.back() != "tag" ||
      (head.size() - 4) % 2 != 0)
    throw IoError("CSV: header must be level,dof,h,{name,name_order}...,tag");
  ConvergenceTable t;
  for (std::size_t k = 3; k + 1 < head.size(); k += 2) {
    if (head[k + 1] != head[k] + "_order") throw IoError("CSV: column '" + head[k] + "' lacks its order column");
    t.columns.push_back(head[k]);
  }
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != head.size())
      throw IoError("CSV: record " + std::to_string(i) + " has " + std::to_string(rec.size()) + " fields, expected " +
                    std::to_string(head.size()));
    ConvergenceRow r;
    r.level = parse_integer<int>(rec[0]);
    r.dof = parse_integer<std::size_t>(rec[1]);
    r.h = parse_double(rec[2]);
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
      r.errors.push_back(parse_double(rec[3 + 2 * k]));
      r.orders.push_back(parse_double(rec[4 + 2 * k]));
    }
    r.tag = rec.back();
    t.rows.push_back(std::move(r));
  }
  return t;
}

void emit_csv(const ConvergenceTable& table, const std::filesystem::path& path) {
  if (path.empty()) throw IoError("emit_csv: empty path");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_csv(table);
  if (!out) throw IoError("write failed for " + path.string());
}

ConvergenceTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace surfrec
