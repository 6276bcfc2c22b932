// Acceptance criteria 1-9 at full size. Prints one PASS/FAIL line per
// criterion. Exits nonzero when a criterion fails that is not listed as
// unattainable in acceptance_suite.hpp.

#include <cstdio>

#include "acceptance_suite.hpp"
#include "nsp/parallel.hpp"

int main(int argc, char** argv) {
  nsp::set_threads(nsp::threads_from_env());
  nsp::acceptance::Options opt;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--quick") opt.quick = true;
  const auto all = nsp::acceptance::run_suite(opt);
  int passed = 0, known = 0;
  for (const auto& o : all) {
    passed += o.pass ? 1 : 0;
    known += (!o.pass && o.known_unattainable) ? 1 : 0;
  }
  const int unexpected = nsp::acceptance::unexpected_failures(all);
  std::printf("%d/%zu criteria passed; %d known unattainable; %d unexpected failure(s)\n", passed, all.size(), known,
              unexpected);
  return unexpected == 0 ? 0 : 1;
}
