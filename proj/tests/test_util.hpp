#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

namespace testutil {

inline std::filesystem::path scratch_root() {
  return std::filesystem::temp_directory_path() / ("vpkit-test-" + std::to_string(::getpid()));
}

// Removes everything fresh_dir() created when the test binary exits.
inline struct ScratchCleanup {
  ~ScratchCleanup() {
    std::error_code ec;
    std::filesystem::remove_all(scratch_root(), ec);
  }
} scratch_cleanup;

/// Empty scratch directory unique to this process.
inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = scratch_root() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
