#pragma once

// Text formats for point clouds:
//   plain: first line "d l", then l lines of d whitespace-separated numbers
//   csv:   header "x1,...,xd", then one comma-separated point per line
// Blank lines and lines starting with '#' are ignored in both.

#include "polyproj/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polyproj {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Detects the format from the first content line. Throws ParseError.
PointCloud parse_point_cloud(std::string_view text);
PointCloud read_point_cloud(const std::filesystem::path& path);

/// A single point: either a bare line of coordinates or a one-point cloud file.
Vector parse_point(std::string_view text);
Vector read_point(const std::filesystem::path& path);

void write_point_cloud(std::ostream& out, const PointCloud& cloud);
void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace polyproj
