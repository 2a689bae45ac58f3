#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gamedyn {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;  // wall clock; not serialized into reports
};

std::vector<std::string> verify_check_names();

/// Run the property suite ("all" or a single check by name). `on_result`
/// fires as each check finishes.
std::vector<CheckResult> run_verify_suite(
    const std::string& suite,
    const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace gamedyn
