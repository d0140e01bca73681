// Neutral-meson mixing observables in Bloch-sphere language.
//
// Observables (dE, dGamma, |q/p|) and parameters (r, theta_eg, |E|) are two
// coordinatisations of the same effective Hamiltonian. The complex
// splitting z = sqrt(1 - r^2 - 2 i r cos theta) takes the principal branch, so
// dE >= 0 and dGamma carries the sign of cos theta.

#pragma once

#include "cuq/core.hpp"

#include <string>
#include <vector>

namespace cuq {

struct MesonObservables {
    double delta_E = 0.0;      // ps^-1, >= 0
    double delta_Gamma = 0.0;  // ps^-1, signed
    double q_over_p = 1.0;     // |q/p| > 0
};

struct BlochParameters {
    double r = 0.0;
    double theta_eg_deg = 0.0;  // (-180, 180]
    double E_mag = 0.0;         // ps^-1
};

MesonObservables observables_from_bloch(const BlochParameters& p);

struct BlochInversion {
    BlochParameters params;     // reproduces the signed dGamma that was given
    BlochParameters alternate;  // 180 deg - theta; reproduces -dGamma
    bool ambiguous = false;     // alternate differs from params
};

// Closed-form inversion. Throws Unphysical when no r in [0, 10] reproduces the
// observables, InvalidArgument for dE < 0 or |q/p| <= 0.
BlochInversion bloch_from_observables(const MesonObservables& o);

// In the CPT basis (e x gamma along the third axis) this is b_3.
double flavour_asymmetry(const BlochState& state);
// Basis-free form: b . (e x gamma)/|e x gamma|.
double flavour_asymmetry(const BlochState& state, const QubitModel& model);

enum class DampingClass { Oscillatory, Critical, Overdamped };

const char* to_string(DampingClass c);

inline constexpr double kCriticalTolerance = 1e-12;

DampingClass classify_damping(double r);

struct Measured {
    double value;
    double error;
};

struct MesonCatalogueEntry {
    std::string name;  // K0, D0, Bd0, Bs0
    Measured delta_E;
    Measured delta_Gamma;  // magnitude as tabulated
    Measured q_over_p_minus_1;
    Measured r;
    Measured theta_eg_deg;  // as tabulated; may lie outside (-180, 180]
    Measured E_mag;
    int delta_Gamma_sign;  // sign consistent with the tabulated theta under the principal branch

    MesonObservables observables() const;  // signed dGamma
    BlochParameters bloch() const;         // theta normalised to (-180, 180]
};

const std::vector<MesonCatalogueEntry>& catalogue();
const MesonCatalogueEntry& catalogue_entry(const std::string& name);

// B_d reference rows (measurement and Standard-Model expectation), stored as
// constants only.
struct BdReferenceRow {
    std::string label;
    Measured delta_E;
    Measured delta_Gamma;
    Measured q_over_p_minus_1;
    Measured r;
    Measured theta_eg_deg;
    Measured E_mag;
};

const std::vector<BdReferenceRow>& bd_reference();

// Wraps an angle in degrees into (-180, 180].
double normalize_degrees(double deg);

}  // namespace cuq
