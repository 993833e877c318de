#pragma once

#include <chrono>
#include <span>
#include <string>
#include <vector>

#include "mexpr/codec.hpp"

namespace mexpr {

struct ProcessResult {
  int exit_code = -1;  // -1 when the process could not be started or was killed
  bool spawned = false;
  bool timed_out = false;
  Bytes out;
  std::string err;
};

// Runs argv[0] (resolved through PATH) feeding `input` on stdin and
// collecting stdout/stderr. The child is killed once `timeout` elapses.
ProcessResult run_process(const std::vector<std::string>& argv, std::span<const std::uint8_t> input,
                          std::chrono::milliseconds timeout);

// True if `program` names an executable file, directly or through PATH.
bool executable_available(const std::string& program);

// Whitespace split; no quoting rules.
std::vector<std::string> split_command(const std::string& command);

}  // namespace mexpr
