#pragma once

#include <ostream>

namespace ravg {

/// Run the property suites (retraction axioms, distance equivalences, update
/// equivalence scaling, averaging identities, determinism). Prints one line
/// per check; returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace ravg
