#include "hpbl/io.hpp"

#include <cstdio>
#include <fstream>

#include "hpbl/types.hpp"

namespace hpbl {

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    out << text;
}

}  // namespace hpbl
