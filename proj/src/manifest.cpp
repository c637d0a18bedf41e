#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "deepdc/error.hpp"
#include "deepdc/evalkit.hpp"

namespace deepdc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw Error(ErrorCode::DecodeError, "line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
  return s.substr(start);
}

}  // namespace

DatasetManifest read_manifest(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + csv_path.string());
  DatasetManifest manifest;
  manifest.base_dir = csv_path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line, line_no);
    for (auto& f : fields) f = trim(f);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"ref", "dist", "mos"})
        throw Error(ErrorCode::DecodeError, csv_path.string() + ": header must be ref,dist,mos");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3)
      throw Error(ErrorCode::DecodeError, csv_path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    ManifestRecord rec{fields[0], fields[1], 0.0};
    const auto& m = fields[2];
    const auto [ptr, ec] = std::from_chars(m.data(), m.data() + m.size(), rec.mos);
    if (ec != std::errc{} || ptr != m.data() + m.size() || !std::isfinite(rec.mos))
      throw Error(ErrorCode::DecodeError, csv_path.string() + ":" + std::to_string(line_no) + ": bad mos '" + m + "'");
    manifest.records.push_back(std::move(rec));
  }
  if (!header_seen) throw Error(ErrorCode::DecodeError, csv_path.string() + ": missing header");
  return manifest;
}

std::string format_manifest(const std::vector<ManifestRecord>& records) {
  std::ostringstream out;
  out << "ref,dist,mos\n";
  char buf[64];
  for (const auto& r : records) {
    const auto res = std::to_chars(buf, buf + sizeof buf, r.mos);
    out << csv_field(r.ref) << ',' << csv_field(r.dist) << ',' << std::string(buf, res.ptr) << '\n';
  }
  return out.str();
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write manifest " + csv_path.string());
  out << format_manifest(manifest.records);
  if (!out) throw Error(ErrorCode::IoError, "short write to " + csv_path.string());
}

}  // namespace deepdc
