// Command-line front end: decides hyponormality of T_{z^n + C|z|^s} on the
// weighted Bergman space built from a radial measure on [0,1], and exposes
// the underlying moment / matrix / spectrum machinery as scriptable
// subcommands with deterministic CSV and JSON output.

#include <cinttypes>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hyponorm/hyponormality.hpp"
#include "hyponorm/jacobi.hpp"
#include "hyponorm/measures.hpp"
#include "hyponorm/spectral.hpp"

using nlohmann::json;
using namespace hyponorm;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CommonOpts {
    std::string measure = "area";
    int n = 1;
    double s = 2.0;
    double tol = 1e-8;
    double quad_tol = 1e-10;
    bool normalize = false;
    bool force = false;
    std::int64_t initial_slots = 64;
    std::int64_t max_slots = std::int64_t{1} << 20;
    bool no_refine = false;

    void attach(CLI::App* cmd, bool with_symbol = true) {
        cmd->add_option("--measure", measure,
                        "Measure: area | beta:<b> | atoms:<file.csv> | density:<file.csv>")
            ->capture_default_str();
        if (with_symbol) {
            cmd->add_option("--n", n, "Power of z (n >= 1)")->capture_default_str();
            cmd->add_option("--s", s, "Power of |z| (s > 0)")->capture_default_str();
        }
        cmd->add_option("--tol", tol, "Bracket tolerance")->capture_default_str();
        cmd->add_option("--quad-tol", quad_tol, "Absolute tolerance for tabulated moments")
            ->capture_default_str();
        cmd->add_flag("--normalize", normalize, "Rescale the measure mass to 1");
        cmd->add_flag("--force", force,
                      "Proceed with hypothesis-violating measures (results carry a banner)");
        cmd->add_option("--initial-slots", initial_slots, "First truncation size per chain")
            ->capture_default_str();
        cmd->add_option("--max-slots", max_slots, "Truncation cap per chain")
            ->capture_default_str();
        cmd->add_flag("--no-refine", no_refine, "Disable the deep-window lower-bound refinement");
    }

    MeasureSpec parse_measure() const {
        if (measure == "area") return MeasureSpec::area();
        if (measure.rfind("beta:", 0) == 0) {
            return MeasureSpec::beta_weight(std::stod(measure.substr(5)));
        }
        if (measure.rfind("atoms:", 0) == 0) {
            return MeasureSpec::load_atoms_csv(measure.substr(6));
        }
        if (measure.rfind("density:", 0) == 0) {
            return MeasureSpec::load_density_csv(measure.substr(8));
        }
        throw Error("unknown measure selector: " + measure);
    }

    std::shared_ptr<const MomentProvider> make_provider() const {
        MomentProvider::Options o;
        o.normalize = normalize;
        o.force = force;
        o.quad_abs_tol = quad_tol;
        return std::make_shared<MomentProvider>(parse_measure(), o);
    }

    std::shared_ptr<JacobiOperator> make_operator() const {
        return std::make_shared<JacobiOperator>(make_provider(), SymbolParams{n, s});
    }

    TruncationPolicy policy() const {
        TruncationPolicy p;
        p.initial_slots = initial_slots;
        p.max_slots = max_slots;
        p.window_refinement = !no_refine;
        return p;
    }
};

json norm_to_json(const NormEstimate& est) {
    json j;
    j["lower"] = est.lower;
    j["upper"] = est.upper;
    j["certified"] = est.certified;
    j["truncation_size"] = est.truncation_size;
    json trace = json::array();
    for (const TraceRecord& t : est.trace) {
        trace.push_back({{"truncation", t.truncation}, {"lower", t.lower}});
    }
    j["trace"] = trace;
    if (est.banner) j["banner"] = *est.banner;
    return j;
}

json report_to_json(const HyponormalityReport& rep, const CommonOpts& opt) {
    json j;
    j["schema"] = 1;
    j["measure"] = opt.measure;
    j["n"] = rep.params.n;
    j["s"] = rep.params.s;
    j["threshold_lower"] = rep.threshold_lower;
    j["threshold_upper"] = rep.threshold_upper;
    j["oracle_residual"] = rep.oracle_residual;
    j["norm"] = norm_to_json(rep.norm);
    if (rep.c_modulus) {
        j["c_modulus"] = *rep.c_modulus;
        j["classification"] = to_string(*rep.classification);
    }
    if (rep.assumption_banner) j["banner"] = *rep.assumption_banner;
    return j;
}

std::vector<double> parse_t_list(const std::string& list) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < list.size()) {
        std::size_t next = list.find(',', pos);
        if (next == std::string::npos) next = list.size();
        out.push_back(std::stod(list.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

std::vector<double> load_vector_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInputFile("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw BadInputFile("empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "u") throw BadInputFile(path + ": expected header \"u\"");
    std::vector<double> u;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        u.push_back(std::stod(line));
    }
    return u;
}

} // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    if (const char* env = std::getenv("HYPONORM_THREADS")) {
        const int want = std::atoi(env);
        if (want > 0) omp_set_num_threads(std::min(want, omp_get_max_threads()));
    }
#endif

    CLI::App app{"Hyponormality thresholds for Toeplitz symbols z^n + C|z|^s "
                 "on weighted Bergman spaces"};
    app.require_subcommand(1);

    CommonOpts opt;

    // ---- threshold
    auto* cmd_threshold = app.add_subcommand(
        "threshold", "Critical constant C_max = 1/||J|| and optional classification of C");
    opt.attach(cmd_threshold);
    std::optional<double> c_mod;
    std::optional<double> c_re, c_im;
    cmd_threshold->add_option("--c", c_mod, "Modulus of C to classify");
    cmd_threshold->add_option("--c-re", c_re, "Real part of C");
    cmd_threshold->add_option("--c-im", c_im, "Imaginary part of C");

    // ---- matrix
    auto* cmd_matrix = app.add_subcommand("matrix", "Dump the truncated matrix");
    opt.attach(cmd_matrix);
    std::int64_t mat_N = 16;
    std::string mat_format = "band";
    cmd_matrix->add_option("--N", mat_N, "Truncation size")->capture_default_str();
    cmd_matrix->add_option("--format", mat_format, "band | dense")->capture_default_str();

    // ---- spectrum
    auto* cmd_spectrum = app.add_subcommand("spectrum", "Eigenvalue scan of the truncation");
    opt.attach(cmd_spectrum);
    std::int64_t spec_N = 200;
    double spec_margin = -1.0;
    cmd_spectrum->add_option("--N", spec_N, "Truncation size")->capture_default_str();
    cmd_spectrum->add_option("--margin", spec_margin,
                             "Outlier margin beyond s/n (default 10*tol)");

    // ---- moments
    auto* cmd_moments = app.add_subcommand("moments", "Moment table gamma_t");
    opt.attach(cmd_moments, /*with_symbol=*/false);
    std::string t_list;
    double t_from = 0.0, t_to = -1.0, t_step = 1.0;
    cmd_moments->add_option("--t", t_list, "Comma-separated exponents");
    cmd_moments->add_option("--t-from", t_from, "Grid start")->capture_default_str();
    cmd_moments->add_option("--t-to", t_to, "Grid end (enables the grid)");
    cmd_moments->add_option("--t-step", t_step, "Grid step")->capture_default_str();

    // ---- verify
    auto* cmd_verify = app.add_subcommand(
        "verify", "Cross-check the norm against the variational quotient");
    opt.attach(cmd_verify);

    // ---- form
    auto* cmd_form = app.add_subcommand("form", "Evaluate the commutator form Q(u, c)");
    opt.attach(cmd_form);
    std::string u_path;
    double form_c = 0.0;
    cmd_form->add_option("--u", u_path, "CSV file with header \"u\", one entry per line")
        ->required();
    cmd_form->add_option("--c", form_c, "Coupling strength c = |C|")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_threshold->parsed()) {
            auto op = opt.make_operator();
            HyponormalityReport rep = threshold(*op, opt.tol, opt.policy());
            if (c_re || c_im) {
                const std::complex<double> c{c_re.value_or(0.0), c_im.value_or(0.0)};
                rep.c_modulus = std::abs(c);
            } else if (c_mod) {
                rep.c_modulus = *c_mod;
            }
            if (rep.c_modulus) rep.classification = classify(rep, *rep.c_modulus);
            std::cout << report_to_json(rep, opt).dump(2) << "\n";
            return rep.norm.certified ? 0 : 2;
        }

        if (cmd_matrix->parsed()) {
            auto op = opt.make_operator();
            const TruncatedMatrix t = build_truncated(*op, mat_N);
            if (mat_format == "band") {
                std::cout << "k,a_k\n";
                for (std::size_t k = 0; k < t.entries.size(); ++k) {
                    std::cout << k << "," << fmt17(t.entries[k]) << "\n";
                }
            } else if (mat_format == "dense") {
                for (std::int64_t j = 0; j < t.size; ++j) {
                    std::cout << (j ? ",c" : "c") << j;
                }
                std::cout << "\n";
                for (std::int64_t i = 0; i < t.size; ++i) {
                    for (std::int64_t j = 0; j < t.size; ++j) {
                        if (j) std::cout << ",";
                        std::cout << fmt17(t.at(i, j));
                    }
                    std::cout << "\n";
                }
            } else {
                throw Error("unknown matrix format: " + mat_format);
            }
            return 0;
        }

        if (cmd_spectrum->parsed()) {
            auto op = opt.make_operator();
            const SpectrumScan scan = spectrum_scan(*op, spec_N, opt.tol, spec_margin);
            std::cout << "index,eigenvalue,chain_residue,outlier_flag\n";
            for (std::size_t i = 0; i < scan.eigenvalues.size(); ++i) {
                const EigRecord& e = scan.eigenvalues[i];
                std::cout << i << "," << fmt17(e.value) << "," << e.residue << ","
                          << (e.outlier ? 1 : 0) << "\n";
            }
            return 0;
        }

        if (cmd_moments->parsed()) {
            auto mp = opt.make_provider();
            std::vector<double> ts;
            if (!t_list.empty()) {
                ts = parse_t_list(t_list);
            } else if (t_to >= t_from) {
                for (double t = t_from; t <= t_to + 1e-12; t += t_step) ts.push_back(t);
            } else {
                ts = {0, 1, 2, 3, 4, 5, 6, 7, 8};
            }
            std::cout << "t,gamma\n";
            for (double t : ts) {
                std::cout << fmt17(t) << "," << fmt17(mp->gamma(t)) << "\n";
            }
            return 0;
        }

        if (cmd_verify->parsed()) {
            auto op = opt.make_operator();
            const NormEstimate est = operator_norm(*op, opt.tol, opt.policy());
            const double resid = oracle_residual(*op, est);
            json j;
            j["schema"] = 1;
            j["measure"] = opt.measure;
            j["n"] = opt.n;
            j["s"] = opt.s;
            j["norm"] = norm_to_json(est);
            j["oracle_residual"] = resid;
            j["residual_ok"] = resid <= 10.0 * opt.tol;
            std::cout << j.dump(2) << "\n";
            return (resid <= 10.0 * opt.tol) ? 0 : 2;
        }

        if (cmd_form->parsed()) {
            auto mp = opt.make_provider();
            const std::vector<double> u = load_vector_csv(u_path);
            const double q =
                commutator_form(*mp, SymbolParams{opt.n, opt.s}, std::span(u.data(), u.size()),
                                form_c);
            json j;
            j["schema"] = 1;
            j["measure"] = opt.measure;
            j["n"] = opt.n;
            j["s"] = opt.s;
            j["c"] = form_c;
            j["Q"] = q;
            std::cout << j.dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
