#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace dualmem {
class Transport;
}

namespace dualmem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line. `args` excludes the program name; a leading
// `dualmem` or `rolememo` noun is accepted and ignored. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// As above, with LLM traffic sent through `transport` instead of HTTP. Replay
// runs still never touch it.
int run_with_transport(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                       std::shared_ptr<Transport> transport);

int main_entry(int argc, char** argv);

}  // namespace dualmem::cli
