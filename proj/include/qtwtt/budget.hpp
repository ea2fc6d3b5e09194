#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qtwtt {

enum class UncertaintyType { A, B, AB };

const char* utype_name(UncertaintyType t);
UncertaintyType utype_from_name(const std::string& s);

struct BudgetTerm {
    std::string name;
    double value_ps = 0.0;
    UncertaintyType utype = UncertaintyType::B;
    std::string formula_note;
};

// Terms plus their quadrature combination; the combined value is always
// recomputed from the current term list.
struct UncertaintyBudget {
    std::vector<BudgetTerm> terms;
    double combined_ps() const;
};

// Statistically evaluated two-way measurement scatter (type A).
BudgetTerm measurement_term(const std::vector<double>& t0_series_ps);

// Reuses the coincidence-statistics noise model at the system's no-link
// widths and the operating event counts (type A).
BudgetTerm calibration_term(double w1_fwhm_ps, double n1, double w2_fwhm_ps, double n2);

// Directional delay difference from inter-source center-wavelength spread:
// value = L * D * (sqrt(2) * dlambda_sd) / 2, the sqrt(2) from two
// independent sources contributing to the wavelength difference.
BudgetTerm fiber_nonreciprocity_term(double length_km, double d_ps_per_nm_km,
                                     double dlambda_sd_nm_per_source,
                                     UncertaintyType utype,
                                     const std::string& name = "Non-reciprocal delay from the fiber link");

// Same form evaluated at the compensation module's equivalent length.
BudgetTerm dcfm_nonreciprocity_term(double equivalent_length_km, double d_ps_per_nm_km,
                                    double dlambda_sd_nm_per_source,
                                    UncertaintyType utype);

BudgetTerm pmd_term(double length_km, double coeff_ps_per_sqrt_km = 0.05);
BudgetTerm sagnac_term(double length_km, double coeff_ps_per_km = 0.05);

UncertaintyBudget combine(std::vector<BudgetTerm> terms);

// Budget-spec text: one term per line, "name : type : value_ps : note",
// '#' comments. The default spec carries the stock six-term budget.
UncertaintyBudget parse_budget_text(const std::string& text);
UncertaintyBudget load_budget_file(const std::string& path);
const std::string& default_budget_text();

// Human-readable report and a machine-readable key/value mirror.
void write_budget_report(std::ostream& out, const UncertaintyBudget& b);
void write_budget_kv(std::ostream& out, const UncertaintyBudget& b);

} // namespace qtwtt
