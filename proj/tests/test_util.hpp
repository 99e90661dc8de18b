#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wtlstm/tensor.hpp"

namespace wtlstm::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

inline void randomize(Parameter& p, Rng& rng, double scale) {
  for (auto& v : p.value.values()) v = rng.uniform(-scale, scale);
}

inline std::string fixture(const std::string& name) {
  return (std::filesystem::path(WTLSTM_FIXTURE_DIR) / name).string();
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Fresh empty directory under the build tree, unique per test name.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(WTLSTM_SCRATCH_DIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace wtlstm::testing
