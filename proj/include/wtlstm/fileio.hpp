#pragma once

#include <string>

namespace wtlstm {

std::string read_file(const std::string& path);

/// Writes `<path>.partial` and renames it over `path` once complete. If the
/// write fails the `.partial` file is left behind as a marker.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace wtlstm
