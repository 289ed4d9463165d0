#include "polyproj/point_cloud_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

namespace polyproj {

namespace {

struct Line {
  std::size_t number;
  std::string_view text;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    raw = trim(raw);
    if (raw.empty() || raw.front() == '#') continue;
    out.push_back({number, raw});
  }
  return out;
}

std::vector<std::string_view> split(std::string_view s, bool comma) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (comma) {
      const auto c = s.find(',', i);
      out.push_back(trim(s.substr(i, c == std::string_view::npos ? std::string_view::npos : c - i)));
      if (c == std::string_view::npos) break;
      i = c + 1;
      if (i == s.size()) out.push_back({});
    } else {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
      if (i == s.size()) break;
      std::size_t j = i;
      while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
      out.push_back(s.substr(i, j - i));
      i = j;
    }
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "not a number: '" + std::string(tok) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(line, "non-finite value '" + std::string(tok) + "'");
  return value;
}

std::size_t parse_count(std::string_view tok, std::size_t line) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "expected a non-negative integer, got '" + std::string(tok) + "'");
  }
  return value;
}

PointCloud parse_plain(const std::vector<Line>& lines) {
  const auto header = split(lines[0].text, false);
  if (header.size() != 2) throw ParseError(lines[0].number, "header must be 'd l'");
  const std::size_t d = parse_count(header[0], lines[0].number);
  const std::size_t l = parse_count(header[1], lines[0].number);
  if (d == 0 || l == 0) throw ParseError(lines[0].number, "d and l must be positive");
  if (lines.size() - 1 != l) {
    throw ParseError(lines.back().number, "expected " + std::to_string(l) + " points, found " +
                                              std::to_string(lines.size() - 1));
  }
  std::vector<double> coords;
  coords.reserve(d * l);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto toks = split(lines[r].text, false);
    if (toks.size() != d) {
      throw ParseError(lines[r].number, "expected " + std::to_string(d) + " coordinates, found " +
                                            std::to_string(toks.size()));
    }
    for (auto t : toks) coords.push_back(parse_double(t, lines[r].number));
  }
  return PointCloud(d, coords);
}

PointCloud parse_csv(const std::vector<Line>& lines) {
  const auto header = split(lines[0].text, true);
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] != "x" + std::to_string(k + 1)) {
      throw ParseError(lines[0].number, "csv header must be x1,...,xd");
    }
  }
  const std::size_t d = header.size();
  if (lines.size() < 2) throw ParseError(lines[0].number, "csv has no points");
  std::vector<double> coords;
  coords.reserve(d * (lines.size() - 1));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto toks = split(lines[r].text, true);
    if (toks.size() != d) {
      throw ParseError(lines[r].number, "expected " + std::to_string(d) + " columns, found " +
                                            std::to_string(toks.size()));
    }
    for (auto t : toks) coords.push_back(parse_double(t, lines[r].number));
  }
  return PointCloud(d, coords);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
      line_(line) {}

PointCloud parse_point_cloud(std::string_view text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError(0, "empty input");
  if (!lines[0].text.empty() && (lines[0].text.front() == 'x' || lines[0].text.front() == 'X')) {
    return parse_csv(lines);
  }
  return parse_plain(lines);
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  return parse_point_cloud(slurp(path));
}

Vector parse_point(std::string_view text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError(0, "empty input");
  if (lines.size() == 1) {
    const bool comma = lines[0].text.find(',') != std::string_view::npos;
    const auto toks = split(lines[0].text, comma);
    Vector v(static_cast<Eigen::Index>(toks.size()));
    for (std::size_t k = 0; k < toks.size(); ++k) {
      v[static_cast<Eigen::Index>(k)] = parse_double(toks[k], lines[0].number);
    }
    if (v.size() == 0) throw ParseError(lines[0].number, "empty point");
    return v;
  }
  const PointCloud cloud = parse_point_cloud(text);
  if (cloud.size() != 1) throw ParseError(0, "expected a single point");
  return cloud.point(0);
}

Vector read_point(const std::filesystem::path& path) { return parse_point(slurp(path)); }

void write_point_cloud(std::ostream& out, const PointCloud& cloud) {
  out << cloud.dim() << ' ' << cloud.size() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < cloud.size(); ++i) {
    for (std::size_t k = 0; k < cloud.dim(); ++k) {
      if (k) out << ' ';
      out << cloud.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
    out << '\n';
  }
}

void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_point_cloud(out, cloud);
}

}  // namespace polyproj
