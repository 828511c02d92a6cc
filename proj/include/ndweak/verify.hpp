// verify.hpp — oracle battery: propagator-lemma convergence, closed-form vs
// generic-engine cross-validation, trivial limits, normalization and
// decoherence-regime checks. Used by the CLI `verify` verb and the
// acceptance suite.
#pragma once

#include <string>
#include <vector>

namespace ndweak::verify {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;   // the quantity compared against the bound
    double bound = 0.0;
    std::string note;        // extra context (runtimes, counts, ...)
};

CheckResult check_propagator_lemma();
// Closed-form spin-1/2 vs the generic engine on `n_configs` random Bloch
// configurations (fixed seed). flip_phase_sign negates the dispersion to
// demonstrate that the check actually detects a wrong Hamiltonian phase.
CheckResult check_cross_oracle(unsigned n_configs = 100, bool flip_phase_sign = false);
CheckResult check_trivial_limits();
CheckResult check_normalization_battery();
CheckResult check_decoherence_regimes();
CheckResult check_weight_rescaling();
CheckResult check_phase_mutation_detected();

std::vector<CheckResult> run_battery(unsigned n_configs = 100);

// One "PASS name measured<=bound (note)" line per check.
std::string format_result(const CheckResult& r);

} // namespace ndweak::verify
