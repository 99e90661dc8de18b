#include "wtlstm/fileio.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wtlstm/error.hpp"

namespace wtlstm {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  if (ec) throw RuntimeFailure("cannot create directory for '" + path + "': " + ec.message());

  const std::string partial = path + ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write '" + partial + "'");
    out << contents;
    out.flush();
    if (!out) throw RuntimeFailure("write failed for '" + partial + "'");
  }
  fs::rename(partial, target, ec);
  if (ec) throw RuntimeFailure("cannot rename '" + partial + "' to '" + path + "': " + ec.message());
}

}  // namespace wtlstm
