#include "fracback/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fracback/error.hpp"

namespace fracback {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string field_csv(const FemSystem& sys, const GridFunction& u) {
    const auto values = node_values(sys, u);
    std::string out = sys.mesh.dim == 1 ? "x,value\n" : "x,y,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& p = sys.mesh.nodes[i];
        out += format_double(p[0]);
        if (sys.mesh.dim == 2) out += "," + format_double(p[1]);
        out += "," + format_double(values[i]) + "\n";
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorKind::InvalidArgument, "cannot open " + path.string() + " for writing");
    os << content;
    require(static_cast<bool>(os), ErrorKind::NumericalFailure, "write to " + path.string() + " failed");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), ErrorKind::InvalidArgument, "cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace fracback
