#pragma once

#include <string>

#include "config.hpp"

namespace dbem::cli {

// Exit codes.
enum Exit { ok = 0, usage = 1, numerical = 2, violation = 3 };

int cmd_mesh(const RunConfig& c);
int cmd_identities(const RunConfig& c);
int cmd_scan(const RunConfig& c);
int cmd_oracle(const RunConfig& c);
int cmd_resolvent(const RunConfig& c);

std::string hex64(std::uint64_t v);
const char* version();

}  // namespace dbem::cli
