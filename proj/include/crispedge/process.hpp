#pragma once

// Subprocess execution with a wall-clock timeout, and scoped temp
// directories. POSIX only.

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "crispedge/error.hpp"

namespace crispedge {

class ExternalError : public Error {
 public:
  enum class Kind { kLaunch, kNonzeroExit, kTimeout, kMalformedOutput };
  ExternalError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Root for temporary directories: $CRISPEDGE_TMPDIR if set, else the system
/// temp directory.
[[nodiscard]] inline std::filesystem::path temp_root() {
  if (const char* env = std::getenv("CRISPEDGE_TMPDIR"); env && *env) return env;
  return std::filesystem::temp_directory_path();
}

/// mkdtemp-backed directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (temp_root() / "crispedge-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw IoError("cannot create temp directory under " + temp_root().string());
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  /// Combined stdout and stderr.
  std::string output;
};

/// Runs `/bin/sh -c '<command> "$@"' sh args...` so the command may be a
/// template with its own fixed arguments. Output is captured to `log_path`.
inline ProcessResult run_process(const std::string& command, const std::vector<std::string>& args,
                                 std::chrono::milliseconds timeout, const std::filesystem::path& log_path) {
  const std::string script = command + " \"$@\"";
  std::vector<std::string> argv_store = {"sh", "-c", script, "sh"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw ExternalError(ExternalError::Kind::kLaunch, "fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    const int fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      ::dup2(fd, STDOUT_FILENO);
      ::dup2(fd, STDERR_FILENO);
      ::close(fd);
    }
    ::execv("/bin/sh", argv.data());
    ::_exit(127);
  }

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw ExternalError(ExternalError::Kind::kLaunch, "waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (!result.timed_out) result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);

  std::ifstream log(log_path);
  std::ostringstream ss;
  ss << log.rdbuf();
  result.output = ss.str();
  return result;
}

}  // namespace crispedge
