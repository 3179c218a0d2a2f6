#pragma once

#include <string>

namespace hpbl {

// %.17g formatting used by every CSV and JSON writer.
std::string fmt17(double x);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace hpbl
