#pragma once

#include <filesystem>
#include <string>

namespace mrseg::test {

/// Unique directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs a shell command with stdout/stderr captured.
RunResult run_command(const std::string& command);

std::string slurp_file(const std::string& path);
void spill_file(const std::string& text, const std::string& path);

}  // namespace mrseg::test
