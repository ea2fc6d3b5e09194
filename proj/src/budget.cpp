#include "qtwtt/budget.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qtwtt/errors.hpp"
#include "qtwtt/stability.hpp"
#include "qtwtt/twoway.hpp"

namespace qtwtt {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

const char* utype_name(UncertaintyType t)
{
    switch (t) {
    case UncertaintyType::A: return "A";
    case UncertaintyType::B: return "B";
    case UncertaintyType::AB: return "A&B";
    }
    return "?";
}

UncertaintyType utype_from_name(const std::string& s)
{
    if (s == "A") return UncertaintyType::A;
    if (s == "B") return UncertaintyType::B;
    if (s == "A&B" || s == "AB") return UncertaintyType::AB;
    throw ConfigError("bad uncertainty type: '" + s + "'");
}

double UncertaintyBudget::combined_ps() const
{
    double ss = 0.0;
    for (const auto& t : terms) ss += t.value_ps * t.value_ps;
    return std::sqrt(ss);
}

BudgetTerm measurement_term(const std::vector<double>& t0_series_ps)
{
    BudgetTerm t;
    t.name = "Time difference measurement";
    t.value_ps = sample_sd(t0_series_ps);
    t.utype = UncertaintyType::A;
    t.formula_note = "sample SD of the two-way offset series";
    return t;
}

BudgetTerm calibration_term(double w1_fwhm_ps, double n1, double w2_fwhm_ps, double n2)
{
    BudgetTerm t;
    t.name = "System calibration";
    t.value_ps = theoretical_sd(w1_fwhm_ps, n1, w2_fwhm_ps, n2);
    t.utype = UncertaintyType::A;
    t.formula_note = "coincidence-statistics model at no-link widths, operating counts";
    return t;
}

BudgetTerm fiber_nonreciprocity_term(double length_km, double d_ps_per_nm_km,
                                     double dlambda_sd_nm_per_source,
                                     UncertaintyType utype, const std::string& name)
{
    BudgetTerm t;
    t.name = name;
    const double dlambda = std::sqrt(2.0) * dlambda_sd_nm_per_source;
    t.value_ps = length_km * d_ps_per_nm_km * dlambda / 2.0;
    t.utype = utype;
    t.formula_note = "L*D*dlambda/2 with dlambda = sqrt(2) * per-source wavelength SD";
    return t;
}

BudgetTerm dcfm_nonreciprocity_term(double equivalent_length_km, double d_ps_per_nm_km,
                                    double dlambda_sd_nm_per_source, UncertaintyType utype)
{
    return fiber_nonreciprocity_term(equivalent_length_km, d_ps_per_nm_km,
                                     dlambda_sd_nm_per_source, utype,
                                     "Non-reciprocal delay from the DCFM");
}

BudgetTerm pmd_term(double length_km, double coeff_ps_per_sqrt_km)
{
    if (length_km < 0) throw ConfigError("pmd_term: length must be >= 0");
    BudgetTerm t;
    t.name = "PMD effect";
    t.value_ps = coeff_ps_per_sqrt_km * std::sqrt(length_km) / 2.0;
    t.utype = UncertaintyType::B;
    t.formula_note = "coeff * sqrt(L) / 2";
    return t;
}

BudgetTerm sagnac_term(double length_km, double coeff_ps_per_km)
{
    if (length_km < 0) throw ConfigError("sagnac_term: length must be >= 0");
    BudgetTerm t;
    t.name = "Sagnac effect";
    t.value_ps = coeff_ps_per_km * length_km / 2.0;
    t.utype = UncertaintyType::B;
    t.formula_note = "coeff * L / 2";
    return t;
}

UncertaintyBudget combine(std::vector<BudgetTerm> terms)
{
    if (terms.empty()) throw ConfigError("combine: need at least one budget term");
    UncertaintyBudget b;
    b.terms = std::move(terms);
    return b;
}

UncertaintyBudget parse_budget_text(const std::string& text)
{
    UncertaintyBudget b;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::size_t pos = 0;
        for (int i = 0; i < 3; ++i) {
            const auto colon = line.find(':', pos);
            if (colon == std::string::npos) break;
            fields.push_back(trim(line.substr(pos, colon - pos)));
            pos = colon + 1;
        }
        fields.push_back(trim(line.substr(pos)));
        if (fields.size() < 3)
            throw ConfigError("budget line " + std::to_string(line_no) +
                              ": want 'name : type : value_ps [: note]'");
        BudgetTerm t;
        t.name = fields[0];
        t.utype = utype_from_name(fields[1]);
        try {
            t.value_ps = std::stod(fields[2]);
        } catch (const std::exception&) {
            throw ConfigError("budget line " + std::to_string(line_no) + ": bad value");
        }
        if (t.value_ps < 0)
            throw ConfigError("budget line " + std::to_string(line_no) + ": value must be >= 0");
        if (fields.size() > 3) t.formula_note = fields[3];
        b.terms.push_back(std::move(t));
    }
    if (b.terms.empty()) throw ConfigError("budget spec declares no terms");
    return b;
}

UncertaintyBudget load_budget_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open budget spec: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_budget_text(ss.str());
}

const std::string& default_budget_text()
{
    static const std::string text =
        "# Stock uncertainty budget for the 103 km two-way link.\n"
        "# name : type : value_ps : note\n"
        "Time difference measurement : A : 4.0 : long-run SD of the two-way offset\n"
        "System calibration : A : 2.1 : statistics model at no-link widths, operating counts\n"
        "Non-reciprocal delay from the fiber link : A&B : 9.1 : "
        "wavelength determination (3 pm monitored) + thermal wavelength shift (7 pm)\n"
        "Non-reciprocal delay from the DCFM : A&B : 9.1 : "
        "idler center-wavelength determination through the module dispersion\n"
        "PMD effect : B : 0.25 : 0.05 ps/sqrt(km) over 103 km, halved two-way\n"
        "Sagnac effect : B : 2.6 : 0.05 ps/km over 103 km, halved two-way\n"
        "# A 2 degC fiber-temperature swing with a 0.02 nm source mismatch shifts the\n"
        "# two-way offset by well under 1 fs and is carried as a note, not a term.\n";
    return text;
}

void write_budget_report(std::ostream& out, const UncertaintyBudget& b)
{
    out << "Uncertainty budget\n";
    out << "------------------------------------------------------------------\n";
    char buf[256];
    for (const auto& t : b.terms) {
        std::snprintf(buf, sizeof buf, "%-42s %7.2f ps  [%s]\n", t.name.c_str(), t.value_ps,
                      utype_name(t.utype));
        out << buf;
        if (!t.formula_note.empty()) out << "    " << t.formula_note << "\n";
    }
    out << "------------------------------------------------------------------\n";
    std::snprintf(buf, sizeof buf, "%-42s %7.2f ps\n", "Combined standard uncertainty",
                  b.combined_ps());
    out << buf;
}

void write_budget_kv(std::ostream& out, const UncertaintyBudget& b)
{
    char buf[256];
    for (std::size_t i = 0; i < b.terms.size(); ++i) {
        const auto& t = b.terms[i];
        out << "term." << i + 1 << ".name = " << t.name << "\n";
        out << "term." << i + 1 << ".type = " << utype_name(t.utype) << "\n";
        std::snprintf(buf, sizeof buf, "term.%zu.value_ps = %.6f\n", i + 1, t.value_ps);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "combined_ps = %.6f\n", b.combined_ps());
    out << buf;
}

} // namespace qtwtt
