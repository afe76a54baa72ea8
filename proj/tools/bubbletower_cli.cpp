// Batch command surface: constants, expansion and error-norm sweeps, the
// two-stage reduction pipeline, full radial solves, and the randomized
// inequality suites.  All outputs are flat key/value records (CSV or JSON)
// with round-trip-exact float formatting.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bubbletower/bubbles.hpp"
#include "bubbletower/constants.hpp"
#include "bubbletower/energy.hpp"
#include "bubbletower/inequalities.hpp"
#include "bubbletower/norms.hpp"
#include "bubbletower/radial_grid.hpp"
#include "bubbletower/reduction.hpp"

namespace bt = bubbletower;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// One flat record; values keep both the display string and the raw number so
/// JSON emits genuine numbers.
class Record {
  public:
    void add(const std::string& key, double v) { kv_.push_back({key, v, fmt17(v), true}); }
    void add(const std::string& key, long v) {
        kv_.push_back({key, static_cast<double>(v), std::to_string(v), true});
    }
    void add(const std::string& key, int v) { add(key, static_cast<long>(v)); }
    void add(const std::string& key, bool v) { add(key, static_cast<long>(v ? 1 : 0)); }
    void add(const std::string& key, const std::string& v) { kv_.push_back({key, 0.0, v, false}); }

    struct Entry {
        std::string key;
        double num;
        std::string text;
        bool numeric;
    };
    const std::vector<Entry>& entries() const { return kv_; }

  private:
    std::vector<Entry> kv_;
};

void write_csv(std::ostream& os, const std::vector<Record>& rows) {
    if (rows.empty()) return;
    const auto& head = rows.front().entries();
    for (size_t i = 0; i < head.size(); ++i) os << (i ? "," : "") << head[i].key;
    os << "\n";
    for (const Record& r : rows) {
        const auto& e = r.entries();
        for (size_t i = 0; i < e.size(); ++i) os << (i ? "," : "") << e[i].text;
        os << "\n";
    }
}

void write_json(std::ostream& os, const std::vector<Record>& rows, bool array) {
    auto to_json = [](const Record& r) {
        nlohmann::ordered_json j;
        for (const auto& e : r.entries()) {
            if (e.numeric) {
                if (e.text.find_first_of(".eE") == std::string::npos)
                    j[e.key] = static_cast<long long>(e.num);
                else
                    j[e.key] = e.num;
            } else {
                j[e.key] = e.text;
            }
        }
        return j;
    };
    if (array) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const Record& r : rows) arr.push_back(to_json(r));
        os << arr.dump(2) << "\n";
    } else {
        os << to_json(rows.front()).dump(2) << "\n";
    }
}

struct OutputOptions {
    std::string format = "csv";
    std::string path;  // empty -> stdout
};

void emit(const OutputOptions& out, const std::vector<Record>& rows, bool force_array = false) {
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out.path.empty()) {
        file.open(out.path, std::ios::binary);
        if (!file) throw CLI::ValidationError("--out", "cannot open " + out.path);
        os = &file;
    }
    if (out.format == "csv")
        write_csv(*os, rows);
    else
        write_json(*os, rows, force_array || rows.size() != 1);
}

struct EpsRange {
    std::vector<double> values;
};

EpsRange parse_eps_geom(const std::string& spec) {
    EpsRange range;
    double start = 0, stop = 0;
    int count = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &start, &stop, &count) != 3)
        throw CLI::ValidationError("--eps-geom", "expected start:stop:count");
    if (!(count >= 2 && start > 0.0 && start < stop))
        throw CLI::ValidationError("--eps-geom", "need count >= 2 and 0 < start < stop");
    for (int k = 0; k < count; ++k)
        range.values.push_back(start * std::pow(stop / start, double(k) / (count - 1)));
    return range;
}

struct GridOptions {
    int nodes_per_decade = 64;
    int uniform_nodes = 256;
};

void add_grid_options(CLI::App* cmd, GridOptions& g) {
    cmd->add_option("--nodes-per-decade", g.nodes_per_decade,
                    "geometric resolution of the inner region")
        ->capture_default_str();
    cmd->add_option("--uniform-nodes", g.uniform_nodes, "outer uniform interval count")
        ->capture_default_str();
}

void describe_constants(Record& r, const bt::DimensionalConstants& c) {
    r.add("dim", c.dim);
    r.add("p", c.p);
    r.add("alpha_n", c.alpha_n);
    r.add("omega_n", c.omega_n);
    r.add("surface", c.surface);
    r.add("gamma_n", c.gamma_n);
    r.add("sobolev", c.sobolev);
    r.add("sobolev_pow", c.sobolev_pow);
    r.add("a1", c.a1);
    r.add("a2", c.a2);
    r.add("a3", c.a3);
    r.add("a1_quad", c.a1_quad);
    r.add("a2_quad", c.a2_quad);
    r.add("a3_quad", c.a3_quad);
    r.add("a1_discrepancy", c.a1_discrepancy);
    r.add("a2_discrepancy", c.a2_discrepancy);
    r.add("a3_discrepancy", c.a3_discrepancy);
    r.add("theta1", c.theta1.value());
    r.add("theta2", c.theta2.value());
    r.add("alpha1", c.alpha1.value());
    r.add("alpha2", c.alpha2.value());
    r.add("theta1_num", static_cast<long>(c.theta1.num));
    r.add("theta1_den", static_cast<long>(c.theta1.den));
    r.add("theta2_num", static_cast<long>(c.theta2.num));
    r.add("theta2_den", static_cast<long>(c.theta2.den));
    r.add("alpha1_num", static_cast<long>(c.alpha1.num));
    r.add("alpha1_den", static_cast<long>(c.alpha1.den));
    r.add("alpha2_num", static_cast<long>(c.alpha2.num));
    r.add("alpha2_den", static_cast<long>(c.alpha2.den));
}

void describe_expansion(Record& r, double eps, const bt::ExpansionReport& rep) {
    r.add("eps", eps);
    r.add("leading", rep.leading);
    r.add("g1_term", rep.g1_term);
    r.add("g2_term", rep.g2_term);
    r.add("direct", rep.direct);
    r.add("residual_after_leading", rep.residual_after_leading);
    r.add("residual_after_g1", rep.residual_after_g1);
    r.add("residual_after_g2", rep.residual_after_g2);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bubble-tower laboratory for the critical radial problem"};
    app.require_subcommand(1);
    app.set_config("--config", "", "line-based key = value file; flags override");
    app.get_config_formatter_base()->comment('#');

    OutputOptions out;
    app.add_option("--format", out.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--out", out.path, "output path (default stdout)");

    // ---- constants ----------------------------------------------------
    int dim = 7;
    auto* c_constants = app.add_subcommand("constants", "dimension-dependent closed forms");
    c_constants->add_option("--dim", dim, "space dimension, >= 7")->required();

    // ---- expansion ----------------------------------------------------
    auto* c_exp = app.add_subcommand("expansion", "tower energy against its expansion");
    double radius = 1.0, eps = 0.1, d1 = 1.0, d2 = 1.0, robin_factor = 1.0, rel_tol = 1e-8;
    c_exp->add_option("--dim", dim)->required();
    c_exp->add_option("--radius", radius)->capture_default_str();
    c_exp->add_option("--eps", eps)->required();
    c_exp->add_option("--d1", d1)->required();
    c_exp->add_option("--d2", d2)->required();
    c_exp->add_option("--robin-factor", robin_factor)->capture_default_str();
    c_exp->add_option("--rel-tol", rel_tol)->capture_default_str();

    // ---- errnorm --------------------------------------------------------
    auto* c_err = app.add_subcommand("errnorm", "error-term norms of the two stages");
    std::string which = "r1";
    GridOptions gopt;
    c_err->add_option("--which", which)->check(CLI::IsMember({"r1", "r2", "r2-surrogate"}));
    c_err->add_option("--dim", dim)->required();
    c_err->add_option("--radius", radius)->capture_default_str();
    c_err->add_option("--eps", eps)->required();
    c_err->add_option("--d1", d1)->required();
    c_err->add_option("--d2", d2);
    add_grid_options(c_err, gopt);

    // ---- aux ------------------------------------------------------------
    auto* c_aux = app.add_subcommand("aux", "two-stage remainder solve");
    double tol = 1e-10;
    c_aux->add_option("--dim", dim)->required();
    c_aux->add_option("--radius", radius)->capture_default_str();
    c_aux->add_option("--eps", eps)->required();
    c_aux->add_option("--d1", d1)->required();
    c_aux->add_option("--d2", d2)->required();
    c_aux->add_option("--tol", tol)->capture_default_str();
    add_grid_options(c_aux, gopt);

    // ---- solve ----------------------------------------------------------
    auto* c_solve = app.add_subcommand("solve", "damped Newton on the full radial problem");
    std::string init = "tower";
    std::string profile_out;
    double delta1 = 0.0, delta2 = 0.0;
    bool d1_set = false, d2_set = false, del1_set = false, del2_set = false;
    c_solve->add_option("--dim", dim)->required();
    c_solve->add_option("--radius", radius)->capture_default_str();
    c_solve->add_option("--eps", eps)->required();
    c_solve->add_option("--d1", d1)->each([&](const std::string&) { d1_set = true; });
    c_solve->add_option("--d2", d2)->each([&](const std::string&) { d2_set = true; });
    c_solve->add_option("--delta1", delta1)->each([&](const std::string&) { del1_set = true; });
    c_solve->add_option("--delta2", delta2)->each([&](const std::string&) { del2_set = true; });
    c_solve->add_option("--init", init)->check(CLI::IsMember({"tower", "bubble", "zero"}))
        ->capture_default_str();
    c_solve->add_option("--tol", tol)->capture_default_str();
    c_solve->add_option("--profile-out", profile_out, "two-column radius/value record");
    add_grid_options(c_solve, gopt);

    // ---- sweep ----------------------------------------------------------
    auto* c_sweep = app.add_subcommand("sweep", "run a task along a geometric eps sequence");
    std::string task = "errnorm-r1";
    std::string eps_geom;
    c_sweep->add_option("--task", task)
        ->check(CLI::IsMember(
            {"errnorm-r1", "errnorm-r2", "errnorm-r2-surrogate", "stage-norms", "expansion"}))
        ->required();
    c_sweep->add_option("--dim", dim)->required();
    c_sweep->add_option("--radius", radius)->capture_default_str();
    c_sweep->add_option("--eps-geom", eps_geom, "start:stop:count")->required();
    c_sweep->add_option("--d1", d1)->capture_default_str();
    c_sweep->add_option("--d2", d2)->capture_default_str();
    c_sweep->add_option("--robin-factor", robin_factor)->capture_default_str();
    c_sweep->add_option("--tol", tol)->capture_default_str();
    add_grid_options(c_sweep, gopt);

    // ---- check-inequalities ----------------------------------------------
    auto* c_ineq = app.add_subcommand("check-inequalities",
                                      "randomized constants of the elementary inequalities");
    long samples = 100000;
    std::uint64_t seed = 1;
    double p_value = 0.0;
    c_ineq->add_option("--dim", dim)->capture_default_str();
    c_ineq->add_option("--p", p_value, "overrides the exponent derived from --dim");
    c_ineq->add_option("--samples", samples)->capture_default_str();
    c_ineq->add_option("--seed", seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*c_constants) {
            auto c = bt::compute_constants(dim);
            Record r;
            describe_constants(r, c);
            emit(out, {r});
            return kExitOk;
        }

        if (*c_exp) {
            auto c = bt::compute_constants(dim);
            bt::TowerConfig cfg{dim, radius, eps, d1, d2};
            auto rep = bt::expansion_terms(cfg, c, robin_factor, rel_tol);
            Record r;
            r.add("dim", dim);
            r.add("radius", radius);
            r.add("d1", d1);
            r.add("d2", d2);
            r.add("robin_factor", robin_factor);
            describe_expansion(r, eps, rep);
            emit(out, {r});
            return kExitOk;
        }

        if (*c_err) {
            auto c = bt::compute_constants(dim);
            const bt::BallDomain dom{dim, radius};
            Record r;
            r.add("dim", dim);
            r.add("radius", radius);
            r.add("eps", eps);
            r.add("d1", d1);
            if (which == "r2-surrogate") {
                r.add("d2", d2);
                r.add("which", std::string("r2_surrogate"));
                r.add("norm_lq_surrogate", bt::error_norm_r2_surrogate(eps, d1, d2, dom));
            } else {
                const double a1e = c.alpha1.value();
                const double a2e = c.alpha2.value();
                const double del = which == "r1" ? d1 * std::pow(eps, a1e)
                                                 : d2 * std::pow(eps, a2e);
                auto grid = bt::solver_grid(dim, radius, del, gopt.nodes_per_decade,
                                            gopt.uniform_nodes);
                auto rep = which == "r1" ? bt::error_norm_r1(eps, d1, c, dom, grid)
                                         : bt::error_norm_r2(eps, d1, d2, c, dom, grid);
                if (which == "r2") r.add("d2", d2);
                r.add("which", which);
                r.add("norm_projected", rep.norm_projected);
                r.add("norm_unprojected", rep.norm_unprojected);
            }
            emit(out, {r});
            return kExitOk;
        }

        if (*c_aux) {
            const bt::BallDomain dom{dim, radius};
            bt::TowerConfig cfg{dim, radius, eps, d1, d2};
            cfg.validate();
            auto grid = bt::solver_grid(dim, radius, cfg.delta2(), gopt.nodes_per_decade,
                                        gopt.uniform_nodes);
            bt::SolveOptions sopt;
            sopt.tol = tol;
            auto aux = bt::solve_auxiliary(eps, d1, d2, grid, dom, sopt);
            Record r;
            r.add("dim", dim);
            r.add("radius", radius);
            r.add("eps", eps);
            r.add("d1", d1);
            r.add("d2", d2);
            r.add("norm_phi1", aux.norm_phi1);
            r.add("norm_phi2", aux.norm_phi2);
            r.add("stage1_converged", aux.stage1.converged);
            r.add("stage2_converged", aux.stage2.converged);
            r.add("stage1_iterations", aux.stage1.iterations);
            r.add("stage2_iterations", aux.stage2.iterations);
            r.add("stage1_residual_h1", aux.stage1.residual_h1);
            r.add("stage2_residual_h1", aux.stage2.residual_h1);
            r.add("multiplier_1", aux.stage2.multipliers.size() > 0 ? aux.stage2.multipliers[0] : 0.0);
            r.add("multiplier_2", aux.stage2.multipliers.size() > 1 ? aux.stage2.multipliers[1] : 0.0);
            emit(out, {r});
            return aux.stage1.converged && aux.stage2.converged ? kExitOk : kExitNumerical;
        }

        if (*c_solve) {
            const bool d_pair = d1_set || d2_set;
            const bool delta_pair = del1_set || del2_set;
            if (init != "zero") {
                if (d_pair && delta_pair) {
                    std::cerr << "usage error: pass either the d-pair or the delta-pair, not both\n";
                    return kExitUsage;
                }
                if (!d_pair && !delta_pair) {
                    std::cerr << "usage error: solve needs --d1/--d2 or --delta1/--delta2\n";
                    return kExitUsage;
                }
            }
            const double a1e = 1.0 / (dim - 4.0);
            const double a2e = (3.0 * dim - 10.0) / ((dim - 4.0) * (dim - 6.0));
            double dl1 = delta_pair ? delta1 : d1 * std::pow(eps, a1e);
            double dl2 = delta_pair ? delta2 : d2 * std::pow(eps, a2e);
            if (init == "bubble") dl2 = dl1;
            if (init == "zero") { dl1 = radius / 10.0; dl2 = radius / 10.0; }
            auto grid = bt::solver_grid(dim, radius, std::min(dl1, dl2),
                                        gopt.nodes_per_decade, gopt.uniform_nodes);

            bt::RadialField start(grid);
            if (init == "tower") {
                if (!(dl2 < dl1)) {
                    std::cerr << "usage error: tower initialization needs delta2 < delta1\n";
                    return kExitUsage;
                }
                start = bt::discrete_projected_bubble(grid, {dim, dl1});
                auto pu2 = bt::discrete_projected_bubble(grid, {dim, dl2});
                for (size_t i = 0; i < start.size(); ++i) start.values[i] -= pu2.values[i];
            } else if (init == "bubble") {
                start = bt::discrete_projected_bubble(grid, {dim, dl1});
            }
            start.enforce_dirichlet();

            bt::SolveOptions sopt;
            sopt.tol = tol;
            auto sol = bt::solve_bvp(eps, start, sopt);
            Record r;
            r.add("dim", dim);
            r.add("radius", radius);
            r.add("eps", eps);
            r.add("init", init);
            r.add("converged", sol.converged);
            r.add("newton_iterations", sol.newton_iterations);
            r.add("residual_h1", sol.residual_h1);
            r.add("energy", sol.energy);
            r.add("nehari_residual", sol.nehari_residual);
            r.add("nodal_radius", sol.nodal_radius);
            r.add("sign_changes", sol.sign_changes);
            r.add("fitted_delta1", sol.fitted_delta1);
            r.add("fitted_delta2", sol.fitted_delta2);
            if (sol.converged) {
                auto rep = bt::nodal_analysis(sol, eps);
                r.add("nodal_domain_count", rep.nodal_domain_count);
                r.add("sign_at_sphere1", rep.sign_at_sphere1);
                r.add("sign_at_sphere2", rep.sign_at_sphere2);
                r.add("inner_negative", rep.inner_negative);
            }
            emit(out, {r});
            if (!profile_out.empty()) {
                std::ofstream pf(profile_out, std::ios::binary);
                pf << "radius,value\n";
                for (size_t i = 0; i < sol.u.size(); ++i)
                    pf << fmt17(grid->nodes[i]) << "," << fmt17(sol.u.values[i]) << "\n";
            }
            return sol.converged ? kExitOk : kExitNumerical;
        }

        if (*c_sweep) {
            auto eps_values = parse_eps_geom(eps_geom).values;
            auto c = bt::compute_constants(dim);
            const bt::BallDomain dom{dim, radius};
            std::vector<Record> rows;
            bool all_ok = true;
            for (double e : eps_values) {
                Record r;
                if (task == "errnorm-r1") {
                    auto grid = bt::solver_grid(dim, radius, d1 * std::pow(e, c.alpha1.value()),
                                                gopt.nodes_per_decade, gopt.uniform_nodes);
                    auto rep = bt::error_norm_r1(e, d1, c, dom, grid);
                    r.add("eps", e);
                    r.add("norm_projected", rep.norm_projected);
                    r.add("norm_unprojected", rep.norm_unprojected);
                } else if (task == "errnorm-r2") {
                    auto grid = bt::solver_grid(dim, radius, d2 * std::pow(e, c.alpha2.value()),
                                                gopt.nodes_per_decade, gopt.uniform_nodes);
                    auto rep = bt::error_norm_r2(e, d1, d2, c, dom, grid);
                    r.add("eps", e);
                    r.add("norm_projected", rep.norm_projected);
                    r.add("norm_unprojected", rep.norm_unprojected);
                } else if (task == "errnorm-r2-surrogate") {
                    r.add("eps", e);
                    r.add("norm_lq_surrogate", bt::error_norm_r2_surrogate(e, d1, d2, dom));
                } else if (task == "stage-norms") {
                    auto grid = bt::solver_grid(dim, radius, d2 * std::pow(e, c.alpha2.value()),
                                                gopt.nodes_per_decade, gopt.uniform_nodes);
                    bt::SolveOptions sopt;
                    sopt.tol = tol;
                    auto aux = bt::solve_auxiliary(e, d1, d2, grid, dom, sopt);
                    r.add("eps", e);
                    r.add("norm_phi1", aux.norm_phi1);
                    r.add("norm_phi2", aux.norm_phi2);
                    r.add("ratio21", aux.norm_phi2 / aux.norm_phi1);
                    r.add("converged", aux.stage1.converged && aux.stage2.converged);
                    all_ok = all_ok && aux.stage1.converged && aux.stage2.converged;
                } else {  // expansion
                    bt::TowerConfig cfg{dim, radius, e, d1, d2};
                    auto rep = bt::expansion_terms(cfg, c, robin_factor);
                    describe_expansion(r, e, rep);
                }
                rows.push_back(std::move(r));
            }
            emit(out, rows, true);
            return all_ok ? kExitOk : kExitNumerical;
        }

        if (*c_ineq) {
            const double p = p_value > 0.0 ? p_value : (dim + 2.0) / (dim - 2.0);
            std::vector<Record> rows;
            for (bt::Lemma lemma :
                 {bt::Lemma::L21a, bt::Lemma::L21b, bt::Lemma::L22, bt::Lemma::L23,
                  bt::Lemma::L24a, bt::Lemma::L24b, bt::Lemma::L25}) {
                auto res = bt::run_inequality_suite(lemma, p, samples, seed);
                Record r;
                r.add("lemma", bt::lemma_to_string(lemma));
                r.add("p", p);
                r.add("samples", res.samples);
                r.add("seed", static_cast<long>(seed));
                r.add("max_ratio", res.max_ratio);
                r.add("all_finite", res.all_finite);
                r.add("bounded_by_one", res.bounded_by_one);
                rows.push_back(std::move(r));
            }
            emit(out, rows, true);
            return kExitOk;
        }
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
