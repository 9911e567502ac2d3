#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fracback/fem.hpp"

namespace fracback {

/// %.17g, the shortest format that round-trips every double.
std::string format_double(double v);

/// Header `x,value` (1D) or `x,y,value` (2D), one line per mesh node, boundary zeros included.
std::string field_csv(const FemSystem& sys, const GridFunction& u);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace fracback
