// Acceptance suite: one line per criterion; exit status 0 iff all pass.

#include <iostream>

#include "speclp/acceptance.hpp"

int main()
{
    const auto results = speclp::run_acceptance(std::cout);
    const bool ok = speclp::all_passed(results);
    std::cout << (ok ? "all criteria passed" : "some criteria failed") << '\n';
    return ok ? 0 : 1;
}
