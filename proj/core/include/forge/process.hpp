#pragma once

#include <map>
#include <string>
#include <string_view>

namespace forge {

struct CommandResult {
  int exit_code = 0;  // 128 + signal number when killed by a signal
  std::string stderr_text;
};

// Runs `command` through /bin/sh -c. stdout is discarded, stderr captured.
// Throws Error if the shell cannot be started.
CommandResult run_shell(const std::string& command);

// 'single-quoted' for /bin/sh.
std::string shell_quote(std::string_view value);

// Replaces {name} placeholders with shell-quoted values. Throws ConfigError
// for a placeholder that has no value or an unclosed brace.
std::string expand_command(std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace forge
