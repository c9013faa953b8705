// Batch front-end: run residual suites on scenarios, sweep grids, extract
// polynomial coefficients, integrate leaves, and run identity property
// suites. Reports are JSON (schema: config_echo / records / summary), meshes
// and heat-grids are CSV. Exit codes: 0 all checks passed, 1 at least one
// residual failure, 2 input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "contactroll/contact.hpp"
#include "contactroll/correspondence.hpp"
#include "contactroll/scenarios.hpp"
#include "contactroll/surface.hpp"

using contactroll::cplx;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// small parsers and formatters
// ---------------------------------------------------------------------------

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "0.6", "-1.2", "0.5i", "0.3+0.2i", "1-0.4i", "i", "-i"
cplx parse_complex(std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](unsigned char c) { return std::isspace(c); }),
            s.end());
    if (s.empty()) throw InputError("empty complex number");
    // split at the last '+'/'-' that is not a leading sign and not part of an
    // exponent
    size_t split = std::string::npos;
    for (size_t i = s.size(); i-- > 1;) {
        if ((s[i - 1] == 'e' || s[i - 1] == 'E')) continue;
        if (s[i] == '+' || s[i] == '-') {
            split = i;
            break;
        }
    }
    auto parse_part = [](const std::string& part) -> double {
        if (part.empty() || part == "+") return 1.0;
        if (part == "-") return -1.0;
        size_t used = 0;
        double v;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            throw InputError("bad numeric literal: '" + part + "'");
        }
        if (used != part.size()) throw InputError("bad numeric literal: '" + part + "'");
        return v;
    };
    const bool has_i = s.back() == 'i' || s.back() == 'I';
    if (!has_i) return cplx(parse_part(s), 0.0);
    s.pop_back();
    if (split == std::string::npos) return cplx(0.0, parse_part(s));
    return cplx(parse_part(s.substr(0, split)), parse_part(s.substr(split)));
}

std::string format_complex(const cplx& z) {
    char buf[80];
    if (z.imag() == 0.0) {
        std::snprintf(buf, sizeof buf, "%.17g", z.real());
        return buf;
    }
    if (z.real() == 0.0) {
        std::snprintf(buf, sizeof buf, "%.17gi", z.imag());
        return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
    return buf;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// "NxM" or "NxMxP"
std::array<int, 3> parse_grid(const std::string& s, bool allow3) {
    std::array<int, 3> g{0, 0, 1};
    int idx = 0;
    size_t pos = 0;
    while (pos <= s.size() && idx < 3) {
        const size_t x = s.find_first_of("xX", pos);
        const std::string tok = s.substr(pos, x == std::string::npos ? x : x - pos);
        try {
            size_t used = 0;
            g[idx] = std::stoi(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InputError("bad grid syntax: '" + s + "' (want NxM or NxMxP)");
        }
        if (g[idx] < 1) throw InputError("grid extents must be positive: '" + s + "'");
        ++idx;
        if (x == std::string::npos) break;
        pos = x + 1;
    }
    if (idx < 2 || (idx == 3 && !allow3 && g[2] != 1))
        throw InputError("bad grid syntax: '" + s + "'");
    return g;
}

std::array<double, 3> parse_point(const std::string& s) {
    std::array<double, 3> p{};
    std::stringstream ss(s);
    std::string tok;
    int idx = 0;
    while (std::getline(ss, tok, ',') && idx < 3) {
        try {
            size_t used = 0;
            p[idx] = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InputError("bad point syntax: '" + s + "' (want u,v,w)");
        }
        ++idx;
    }
    if (idx != 3) throw InputError("bad point syntax: '" + s + "' (want u,v,w)");
    return p;
}

int thread_count() {
    if (const char* e = std::getenv("CONTACTROLL_THREADS")) {
        const int n = std::atoi(e);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Dispatch `count` work items to a pool; each item returns a report, the
// merged result is sorted by (check_id, point) so the thread count never
// changes output bytes.
template <typename Work>
contactroll::ResidualReport run_pool(int count, Work&& work) {
    const int nthreads = std::max(1, std::min(thread_count(), count));
    std::atomic<int> next{0};
    std::mutex mu;
    contactroll::ResidualReport all;
    std::exception_ptr first_error;
    auto body = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                contactroll::ResidualReport rep = work(i);
                std::lock_guard<std::mutex> lock(mu);
                all.merge(rep);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(nthreads - 1);
    for (int t = 1; t < nthreads; ++t) threads.emplace_back(body);
    body();
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
    std::sort(all.records.begin(), all.records.end(),
              [](const contactroll::ResidualRecord& a, const contactroll::ResidualRecord& b) {
                  if (a.check_id != b.check_id) return a.check_id < b.check_id;
                  if (a.u != b.u) return a.u < b.u;
                  if (a.v != b.v) return a.v < b.v;
                  return a.w < b.w;
              });
    return all;
}

json record_json(const contactroll::ResidualRecord& r) {
    json j;
    j["check_id"] = r.check_id;
    j["point"] = {r.u, r.v, r.w};
    j["residual"] = r.residual;
    j["scale"] = r.scale;
    j["rel"] = r.rel;
    j["pass"] = r.pass;
    j["tol"] = r.tol;
    return j;
}

int emit_report(const json& config_echo, const contactroll::ResidualReport& rep,
                json extra = json::object()) {
    json out;
    out["config_echo"] = config_echo;
    json recs = json::array();
    int passed = 0;
    for (const auto& r : rep.records) {
        recs.push_back(record_json(r));
        if (r.pass) ++passed;
    }
    out["records"] = std::move(recs);
    out["summary"] = {{"total", rep.records.size()},
                      {"passed", passed},
                      {"max_rel_residual", rep.max_rel()}};
    for (auto& [k, v] : extra.items()) out[k] = v;
    std::cout << out.dump(2) << "\n";
    return rep.all_pass() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// scenarios
// ---------------------------------------------------------------------------

struct ScenarioData {
    contactroll::SurfacePtr surface;
    contactroll::ContactFieldPtr field;
    std::array<double, 4> domain{};
};

ScenarioData make_scenario(const std::string& name, const std::string& sigma_str,
                           double perturb, std::uint64_t seed) {
    ScenarioData sc;
    cplx sigma;
    if (name == "pseudosphere") {
        sc.surface = contactroll::make_surface("tractroid");
        sigma = sigma_str.empty() ? cplx(0.6) : parse_complex(sigma_str);
        sc.field = contactroll::backlund_field(sc.surface, sigma);
    } else if (name == "sphere") {
        sc.surface = contactroll::make_surface("sphere");
        sigma = sigma_str.empty() ? cplx(0.0, 0.5) : parse_complex(sigma_str);
        sc.field = contactroll::backlund_field(sc.surface, sigma);
    } else if (name == "random") {
        sc.surface = contactroll::make_surface("random_trig",
                                               {{"seed", static_cast<double>(seed % 1000)}});
        sc.field = contactroll::random_tangent_field(seed, sc.surface);
    } else {
        throw InputError("unknown scenario '" + name +
                         "' (want pseudosphere, sphere, or random)");
    }
    sc.domain = sc.surface->domain();
    if (perturb != 0.0) sc.field = contactroll::perturb_field(sc.field, perturb);
    return sc;
}

// ---------------------------------------------------------------------------
// config file merge: values from --config JSON fill in flags the command line
// did not set
// ---------------------------------------------------------------------------

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed config JSON: ") + e.what());
    }
    if (!j.is_object()) throw InputError("malformed config JSON: top level must be an object");
    return j;
}

template <typename T>
void merge_key(const json& cfg, CLI::Option* opt, const char* key, T& value) {
    if (!cfg.contains(key)) return;
    if (opt && opt->count() > 0) return;  // explicit flags win
    try {
        value = cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed config value for '") + key + "': " + e.what());
    }
}

void reject_unknown_keys(const json& cfg, const std::set<std::string>& known) {
    for (const auto& [k, v] : cfg.items())
        if (!known.count(k)) throw InputError("unknown config key '" + k + "'");
}

// ---------------------------------------------------------------------------
// report command
// ---------------------------------------------------------------------------

struct ReportOpts {
    std::string scenario = "pseudosphere";
    std::string sigma;  // empty -> scenario default
    std::string grid = "9x9x5";
    std::string checks = "eq4,eq5,eq6,eq7,cons,R1";
    double perturb = 0.0;
    double tol = 0.0;  // 0 -> per-family defaults
    std::uint64_t seed = 7;
    std::string config;
};

struct CheckSet {
    bool eq4 = false, eq5 = false, eq6 = false, eq7 = false, cons = false;
    bool tiom = false, mtcj = false, l3 = false, r1 = false;
    bool p1 = false, p2 = false, abc = false;
    bool r3 = false;

    bool contact() const { return eq4 || eq5 || eq6 || eq7 || cons; }
    bool frame() const { return tiom || mtcj || l3 || r1 || p1 || p2 || abc || r3; }
    std::array<int, 3> caps() const {
        std::array<int, 3> c{3, 3, 2};
        if (p1 || p2 || abc) c = {4, 4, 2};
        if (r3) c = {6, 6, 3};
        return c;
    }
};

CheckSet parse_checks(const std::string& s) {
    CheckSet cs;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        if (tok == "eq4") cs.eq4 = true;
        else if (tok == "eq5") cs.eq5 = true;
        else if (tok == "eq6") cs.eq6 = true;
        else if (tok == "eq7") cs.eq7 = true;
        else if (tok == "cons") cs.cons = true;
        else if (tok == "tiom") cs.tiom = true;
        else if (tok == "mtcj") cs.mtcj = true;
        else if (tok == "L3") cs.l3 = true;
        else if (tok == "R1") cs.r1 = true;
        else if (tok == "P1") cs.p1 = true;
        else if (tok == "P2") cs.p2 = true;
        else if (tok == "abc") cs.abc = true;
        else if (tok == "R3") cs.r3 = true;
        else
            throw InputError("unknown check token '" + tok +
                             "' (want eq4,eq5,eq6,eq7,cons,tiom,mtcj,L3,R1,P1,P2,abc,R3)");
    }
    return cs;
}

int cmd_report(const ReportOpts& o) {
    const CheckSet cs = parse_checks(o.checks);
    if (!cs.contact() && !cs.frame()) throw InputError("empty check set");
    const std::array<int, 3> grid = parse_grid(o.grid, true);
    const ScenarioData sc = make_scenario(o.scenario, o.sigma, o.perturb, o.seed);

    auto tol_or = [&](double fam) { return o.tol > 0 ? o.tol : fam; };
    const double tol_eq = tol_or(1e-8), tol_r1 = tol_or(1e-7), tol_frame = tol_or(1e-8);
    const double tol_combo = tol_or(1e-10), tol_poly = tol_or(1e-7);
    const double tol_interp = tol_or(1e-10), tol_zero = tol_or(1e-10);
    const double tol_r3 = tol_or(1e-5);

    // fixed constants for the families that take free transversal data
    const cplx c1(0.4, 0.2), c2(0.8, -0.1), c4(-0.6, 0.3), p(0.5), q(-0.3);

    const auto contact_spec = contactroll::make_jet_spec({3, 3, 3});
    const std::array<int, 3> caps = cs.caps();

    const int nu = grid[0], nv = grid[1], nw = grid[2];
    const auto& dom = sc.domain;
    const double wlo = 0.2, whi = 5.8;
    auto coord = [](double a, double b, int i, int n) {
        return a + (i + 0.5) * (b - a) / n;
    };

    contactroll::ResidualReport all = run_pool(nu * nv * nw, [&](int idx) {
        const int iu = idx % nu, iv = (idx / nu) % nv, iw = idx / (nu * nv);
        const double u = coord(dom[0], dom[1], iu, nu);
        const double v = coord(dom[2], dom[3], iv, nv);
        const double w = coord(wlo, whi, iw, nw);
        contactroll::ResidualReport rep;
        if (cs.contact()) {
            const contactroll::ContactJet cj =
                contactroll::contact_jet(*sc.field, contact_spec, u, v, w);
            contactroll::ResidualReport raw =
                contactroll::integrability_residuals(cj, tol_eq);
            raw.merge(contactroll::consistency_residual(cj, tol_eq));
            if (cs.eq7) {
                contactroll::Form1V omega(2);
                omega.c[0] = contactroll::vec3_const(contact_spec, contactroll::Cx3{});
                omega.c[1] = contactroll::vec3_const(contact_spec, contactroll::Cx3{});
                const contactroll::Form1J dw = contactroll::dw_form(cj, omega);
                const contactroll::Form1J lc =
                    contactroll::leaf_condition_residual(cj, omega, dw);
                raw.add("eq7", u, v, w, contactroll::value_max_abs(lc),
                        contactroll::max_abs(contactroll::value(cj.m)) *
                            (1.0 + contactroll::value_max_abs(dw)),
                        tol_eq);
            }
            for (auto& r : raw.records) {
                const bool want = (cs.eq4 && r.check_id.rfind("eq4", 0) == 0) ||
                                  (cs.eq5 && r.check_id.rfind("eq5", 0) == 0) ||
                                  (cs.eq6 && r.check_id.rfind("eq6", 0) == 0) ||
                                  (cs.eq7 && r.check_id == "eq7") ||
                                  (cs.cons && r.check_id == "cons");
                if (want) rep.records.push_back(std::move(r));
            }
        }
        if (cs.frame()) {
            const contactroll::CorrFrame fb =
                contactroll::frame_build(*sc.field, u, v, w, caps);
            if (cs.tiom) contactroll::tiom_residuals(rep, fb, c1, c2, c4, tol_frame);
            if (cs.mtcj) contactroll::mtcj_checks(rep, fb, tol_frame);
            if (cs.l3)
                contactroll::l3_checks(rep, fb, c1, c2, c4, tol_frame, tol_frame, tol_combo);
            if (cs.r1) {
                const auto rs = contactroll::r1_residuals(fb);
                for (int k = 0; k < 10; ++k)
                    rep.add("R1." + std::to_string(k + 1), u, v, w, std::abs(rs[k].value),
                            rs[k].scale, tol_r1);
            }
            if (cs.p1) contactroll::p1_claims(rep, fb, tol_poly, tol_interp, true);
            if (cs.p2) contactroll::p2_vs_p1(rep, fb, tol_poly, true);
            if (cs.abc)
                for (const auto& id : contactroll::abc_relation_ids())
                    contactroll::abc_checks(rep, fb, id, tol_zero, tol_poly, tol_poly);
            if (cs.r3) {
                contactroll::Cascade cc = contactroll::cascade_build(fb, c1, c2, p, q);
                contactroll::f_solve(cc);
                contactroll::g_eval(cc);
                const contactroll::R3Result r3 = contactroll::r3_residual(cc);
                rep.add("R3", u, v, w, std::abs(r3.residual), r3.scale, tol_r3);
            }
        }
        return rep;
    });

    json echo;
    echo["command"] = "report";
    echo["scenario"] = o.scenario;
    if (!o.sigma.empty() || o.scenario != "random")
        echo["sigma"] = o.sigma.empty()
                            ? (o.scenario == "sphere" ? "0.5i" : "0.6")
                            : o.sigma;
    echo["grid"] = o.grid;
    echo["checks"] = o.checks;
    echo["perturb"] = o.perturb;
    if (o.tol > 0) echo["tol"] = o.tol;
    return emit_report(echo, all);
}

// ---------------------------------------------------------------------------
// identity command: algebraic identities on random data
// ---------------------------------------------------------------------------

struct IdentityOpts {
    std::uint64_t seed = 2024;
    int samples = 1000;
    int field_samples = 4;
    double tol = 0.0;  // 0 -> 1e-12 pointwise algebra, 1e-10 field-level zeros
    std::string config;
};

int cmd_identity(const IdentityOpts& o) {
    using namespace contactroll;
    const double tol_alg = o.tol > 0 ? o.tol : 1e-12;
    const double tol_zero = o.tol > 0 ? o.tol : 1e-10;

    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto rnd = [&] { return cplx(unit(rng), unit(rng)); };
    auto rnd3 = [&] { return Cx3{rnd(), rnd(), rnd()}; };
    const Cx3 e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};

    // complex-orthogonal rotation from two random seeds by Gram-Schmidt;
    // returns false when the draw is too close to the isotropic cone
    auto random_rotation = [&](Mat3c& R) {
        const Cx3 a = rnd3(), b = rnd3();
        const cplx na = dot(a, a);
        if (std::abs(na) < 1e-2) return false;
        const Cx3 f1 = a / std::sqrt(na);
        const Cx3 b2 = b - f1 * dot(f1, b);
        const cplx nb = dot(b2, b2);
        if (std::abs(nb) < 1e-2) return false;
        const Cx3 f2 = b2 / std::sqrt(nb);
        const Cx3 f3 = cross(f1, f2);
        R = Mat3c::from_columns(f1, f2, f3);
        return true;
    };

    struct Worst {
        double rel = 0;
        int at = 0;
    };
    Worst w_action, w_hom, w_rank1, w_trace, w_conj, w_eq1a, w_eq1b;
    auto track = [](Worst& w, double rel, int i) {
        if (rel > w.rel) {
            w.rel = rel;
            w.at = i;
        }
    };

    const auto spec0 = make_jet_spec({0, 0});
    for (int i = 0; i < o.samples; ++i) {
        const Cx3 a = rnd3(), b = rnd3(), c = rnd3();

        track(w_action, max_abs(hat(a) * c - cross(a, c)) / (1.0 + max_abs(cross(a, c))), i);

        const Mat3c lhs = hat(cross(a, b));
        const Mat3c comm = hat(a) * hat(b) - hat(b) * hat(a);
        track(w_hom, max_abs(lhs - comm) / (1.0 + max_abs(lhs)), i);

        Mat3c rank1;
        for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 3; ++s) {
                const Cx3 es[3] = {e1, e2, e3};
                rank1(r, s) = dot(b, es[r]) * dot(a, es[s]) - dot(a, es[r]) * dot(b, es[s]);
            }
        track(w_rank1, max_abs(lhs - rank1) / (1.0 + max_abs(lhs)), i);

        const Mat3c tr = transpose(hat(a)) * hat(b);
        const cplx half_trace = (tr(0, 0) + tr(1, 1) + tr(2, 2)) * cplx(0.5);
        track(w_trace, std::abs(half_trace - dot(a, b)) / (1.0 + std::abs(dot(a, b))), i);

        // conjugation by a complex-orthogonal rotation
        {
            Mat3c R;
            if (random_rotation(R)) {
                const Mat3c lc = hat(R * c);
                const Mat3c rc = R * hat(c) * inverse(R);
                track(w_conj, max_abs(lc - rc) / (1.0 + max_abs(lc)), i);
            }
        }

        // both right-hand sides of the fundamental product identity, on
        // constant-coefficient vector 1-forms
        {
            Form1V w1(2), w2(2);
            w1.c[0] = vec3_const(spec0, rnd3());
            w1.c[1] = vec3_const(spec0, rnd3());
            w2.c[0] = vec3_const(spec0, rnd3());
            w2.c[1] = vec3_const(spec0, rnd3());
            const Vec3J av = vec3_const(spec0, a), bv = vec3_const(spec0, b);
            const auto res = fund_identity_residual(av, bv, w1, w2);
            const double scale =
                1.0 + value_max_abs(wedge(dot(av, w1), dot(bv, w2)));
            track(w_eq1a, value_max_abs(res[0]) / scale, i);
            track(w_eq1b, value_max_abs(res[1]) / scale, i);
        }
    }

    ResidualReport rep;
    auto put = [&](const char* id, const Worst& w) {
        rep.add(id, static_cast<double>(w.at), 0, 0, w.rel, 0.0, tol_alg);
    };
    put("alpha.action", w_action);
    put("alpha.hom", w_hom);
    put("alpha.rank1", w_rank1);
    put("alpha.conj", w_conj);
    put("pair.trace", w_trace);
    put("eq1.form1", w_eq1a);
    put("eq1.form2", w_eq1b);

    // declared zero members of the tangential/normal decompositions, on
    // random fields and random points
    for (int s = 0; s < o.field_samples; ++s) {
        auto surf = make_surface("random_trig",
                                 {{"seed", static_cast<double>(o.seed % 97 + 11 * s)}});
        auto field = random_tangent_field(o.seed + 1000 * s, surf);
        const double u = 0.85 * unit(rng), v = 0.85 * unit(rng),
                     w = 2.0 + 1.5 * unit(rng);
        const CorrFrame fb = frame_build(*field, u, v, w, {4, 4, 2});
        for (const auto& id : abc_relation_ids()) {
            const AbcParts parts = abc_decompose(fb, id);
            const std::string base = std::string("abc.") + id;
            if (parts.a_zero)
                rep.add(base + ".zero.A", u, v, w, max_abs(parts.A), parts.scaleA, tol_zero);
            if (parts.b_zero)
                rep.add(base + ".zero.B", u, v, w, max_abs(parts.B), parts.scaleB, tol_zero);
        }
    }

    json echo;
    echo["command"] = "identity";
    echo["seed"] = o.seed;
    echo["samples"] = o.samples;
    echo["field_samples"] = o.field_samples;
    if (o.tol > 0) echo["tol"] = o.tol;
    return emit_report(echo, rep);
}

// ---------------------------------------------------------------------------
// poly command: quartic coefficient extraction + claim table
// ---------------------------------------------------------------------------

struct PolyOpts {
    std::string scenario = "pseudosphere";
    std::string sigma;
    std::string point = "0.8,1.1,0.4";
    double tol = 0.0;
    std::string config;
};

int cmd_poly(const PolyOpts& o) {
    using namespace contactroll;
    const ScenarioData sc = make_scenario(o.scenario, o.sigma, 0.0, 7);
    const auto pt = parse_point(o.point);
    const double tol_poly = o.tol > 0 ? o.tol : 1e-7;
    const double tol_interp = o.tol > 0 ? o.tol : 1e-10;

    const CorrFrame fb = frame_build(*sc.field, pt[0], pt[1], pt[2], {4, 4, 2});
    const PolyCoeffs pc = p1_coefficients(fb);

    ResidualReport rep;
    p1_claims(rep, fb, tol_poly, tol_interp, true);
    for (auto& r : rep.records) {
        r.u = pt[0];
        r.v = pt[1];
        r.w = pt[2];
    }

    json coeffs = json::array();
    for (int k = 0; k < 15; ++k) {
        const auto [i, j] = PolyCoeffs::kMono[k];
        json c;
        c["monomial"] = "c1^" + std::to_string(i) + " c2^" + std::to_string(j);
        c["re"] = pc.c[k].real();
        c["im"] = pc.c[k].imag();
        coeffs.push_back(std::move(c));
    }
    json extra;
    extra["coefficients"] = std::move(coeffs);
    extra["fit_rel"] = pc.fit_rel;
    extra["coeff_scale"] = pc.scale;

    json echo;
    echo["command"] = "poly";
    echo["scenario"] = o.scenario;
    echo["sigma"] = o.sigma.empty() ? (o.scenario == "sphere" ? "0.5i" : "0.6") : o.sigma;
    echo["point"] = o.point;
    if (o.tol > 0) echo["tol"] = o.tol;
    return emit_report(echo, rep, std::move(extra));
}

// ---------------------------------------------------------------------------
// leaf command: integrate a leaf mesh, CSV output
// ---------------------------------------------------------------------------

struct LeafOpts {
    std::string scenario = "pseudosphere";
    std::string sigma = "0.6";
    double w0 = 1.0;
    std::string grid = "33x33";
    double umin = 0.6, umax = 1.4, vmin = 0.4, vmax = 1.6;
    double tol = 1e-6;
    std::string out;
    std::string config;
};

int cmd_leaf(const LeafOpts& o) {
    using namespace contactroll;
    const ScenarioData sc = make_scenario(o.scenario, o.sigma, 0.0, 7);
    const auto g = parse_grid(o.grid, false);
    if (g[0] < 2 || g[1] < 2) throw InputError("leaf grid needs at least 2x2 points");

    const LeafMesh mesh =
        leaf_integrate(*sc.field, o.umin, o.umax, o.vmin, o.vmax, g[0], g[1], o.w0);

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) throw InputError("cannot open output file '" + o.out + "'");
        os = &file;
    }
    *os << "u,v,w,re_x,im_x,re_y,im_y,re_z,im_z\n";
    for (int iv = 0; iv < mesh.nv; ++iv)
        for (int iu = 0; iu < mesh.nu; ++iu) {
            const size_t k = static_cast<size_t>(iv) * mesh.nu + iu;
            const Cx3& x = mesh.points[k];
            *os << format_double(mesh.u0 + iu * mesh.du) << ','
                << format_double(mesh.v0 + iv * mesh.dv) << ',' << format_double(mesh.w[k])
                << ',' << format_double(x.x.real()) << ',' << format_double(x.x.imag())
                << ',' << format_double(x.y.real()) << ',' << format_double(x.y.imag())
                << ',' << format_double(x.z.real()) << ',' << format_double(x.z.imag())
                << '\n';
        }
    *os << "# path_independence=" << format_double(mesh.path_independence) << "\n";
    if (!o.out.empty())
        std::cout << "path_independence " << format_double(mesh.path_independence) << "\n";
    return mesh.path_independence < o.tol ? 0 : 1;
}

// ---------------------------------------------------------------------------
// grid command: residual heat-grid, CSV output
// ---------------------------------------------------------------------------

struct GridOpts {
    std::string check = "eq2.flat";
    std::string pair;
    std::string scenario;
    std::string sigma;
    std::string grid;
    double tol = 0.0;
    std::string out;
    std::string config;
};

int cmd_grid(const GridOpts& o) {
    using namespace contactroll;
    if (o.pair.empty() == o.scenario.empty())
        throw InputError("grid wants exactly one of --pair or --scenario");

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) throw InputError("cannot open output file '" + o.out + "'");
        os = &file;
    }

    bool all_pass = true;
    if (!o.pair.empty()) {
        if (o.check.rfind("eq2", 0) != 0)
            throw InputError("pair grids support the eq2.* checks, got '" + o.check + "'");
        const double tol = o.tol > 0 ? o.tol : 1e-8;
        IsometricPair pair = make_isometric_pair(o.pair);
        const auto g = parse_grid(o.grid.empty() ? "15x15" : o.grid, false);
        const auto spec = make_jet_spec({3, 3});
        *os << "u,v,rel\n";
        for (int j = 0; j < g[1]; ++j)
            for (int i = 0; i < g[0]; ++i) {
                const double u =
                    pair.domain[0] + (i + 0.5) * (pair.domain[1] - pair.domain[0]) / g[0];
                const double v =
                    pair.domain[2] + (j + 0.5) * (pair.domain[3] - pair.domain[2]) / g[1];
                const RollingFrame fr = roll(*pair.x0, *pair.x, spec, u, v);
                const SurfaceJet sj = surface_jet(*pair.x0, spec, u, v);
                const ResidualReport rep = rolling_residuals(fr, sj, tol);
                double rel = -1;
                for (const auto& r : rep.records)
                    if (r.check_id == o.check) rel = r.rel;
                if (rel < 0)
                    throw InputError("check id '" + o.check + "' not produced by eq2 suite");
                all_pass = all_pass && rel < tol;
                *os << format_double(u) << ',' << format_double(v) << ','
                    << format_double(rel) << '\n';
            }
    } else {
        // scenario heat-grid over (u,v,w) for one contact check id
        const double tol = o.tol > 0 ? o.tol : 1e-8;
        const ScenarioData sc = make_scenario(o.scenario, o.sigma, 0.0, 7);
        const auto g = parse_grid(o.grid.empty() ? "9x9x5" : o.grid, true);
        const auto spec = make_jet_spec({3, 3, 3});
        const auto& dom = sc.domain;
        *os << "u,v,w,rel\n";
        for (int k = 0; k < g[2]; ++k)
            for (int j = 0; j < g[1]; ++j)
                for (int i = 0; i < g[0]; ++i) {
                    const double u = dom[0] + (i + 0.5) * (dom[1] - dom[0]) / g[0];
                    const double v = dom[2] + (j + 0.5) * (dom[3] - dom[2]) / g[1];
                    const double w = 0.2 + (k + 0.5) * (5.8 - 0.2) / g[2];
                    const ContactJet cj = contact_jet(*sc.field, spec, u, v, w);
                    ResidualReport rep = integrability_residuals(cj, tol);
                    rep.merge(consistency_residual(cj, tol));
                    double rel = -1;
                    for (const auto& r : rep.records)
                        if (r.check_id == o.check) rel = r.rel;
                    if (rel < 0)
                        throw InputError("check id '" + o.check +
                                         "' not produced by the scenario suite");
                    all_pass = all_pass && rel < tol;
                    *os << format_double(u) << ',' << format_double(v) << ','
                        << format_double(w) << ',' << format_double(rel) << '\n';
                }
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contactroll: residual suites, identity property checks, polynomial "
                 "extraction, leaf meshes, and residual heat-grids"};
    app.require_subcommand(1);

    ReportOpts ro;
    IdentityOpts io;
    PolyOpts po;
    LeafOpts lo;
    GridOpts go;

    CLI::App* rep = app.add_subcommand("report", "run a residual check set over a grid");
    auto* r_scen = rep->add_option("--scenario", ro.scenario, "pseudosphere|sphere|random");
    auto* r_sigma = rep->add_option("--sigma", ro.sigma, "transversal angle, complex a+bi");
    auto* r_grid = rep->add_option("--grid", ro.grid, "NxM or NxMxP sample grid");
    auto* r_checks = rep->add_option("--checks", ro.checks, "comma list of check families");
    auto* r_pert = rep->add_option("--perturb", ro.perturb, "tangential perturbation size");
    auto* r_tol = rep->add_option("--tol", ro.tol, "override all family tolerances");
    auto* r_seed = rep->add_option("--seed", ro.seed, "seed for the random scenario");
    rep->add_option("--config", ro.config, "JSON config file (flags win)");

    CLI::App* idc = app.add_subcommand("identity", "algebraic identities on random data");
    auto* i_seed = idc->add_option("--seed", io.seed, "RNG seed");
    auto* i_samp = idc->add_option("--samples", io.samples, "number of random samples");
    auto* i_field = idc->add_option("--field-samples", io.field_samples,
                                    "random field sample points for the zero claims");
    auto* i_tol = idc->add_option("--tol", io.tol, "override tolerances");
    idc->add_option("--config", io.config, "JSON config file (flags win)");

    CLI::App* pol = app.add_subcommand("poly", "quartic coefficients and claim table");
    auto* p_scen = pol->add_option("--scenario", po.scenario, "pseudosphere|sphere|random");
    auto* p_sigma = pol->add_option("--sigma", po.sigma, "transversal angle, complex a+bi");
    auto* p_point = pol->add_option("--point", po.point, "evaluation point u,v,w");
    auto* p_tol = pol->add_option("--tol", po.tol, "override tolerances");
    pol->add_option("--config", po.config, "JSON config file (flags win)");

    CLI::App* lf = app.add_subcommand("leaf", "integrate a leaf mesh to CSV");
    auto* l_scen = lf->add_option("--scenario", lo.scenario, "pseudosphere|sphere|random");
    auto* l_sigma = lf->add_option("--sigma", lo.sigma, "transversal angle, complex a+bi");
    auto* l_w0 = lf->add_option("--w0", lo.w0, "initial transversal coordinate");
    auto* l_grid = lf->add_option("--grid", lo.grid, "NxM mesh");
    auto* l_umin = lf->add_option("--umin", lo.umin, "patch bounds");
    auto* l_umax = lf->add_option("--umax", lo.umax, "patch bounds");
    auto* l_vmin = lf->add_option("--vmin", lo.vmin, "patch bounds");
    auto* l_vmax = lf->add_option("--vmax", lo.vmax, "patch bounds");
    auto* l_tol = lf->add_option("--tol", lo.tol, "path-independence budget");
    auto* l_out = lf->add_option("--out", lo.out, "CSV file (default stdout)");
    lf->add_option("--config", lo.config, "JSON config file (flags win)");

    CLI::App* gr = app.add_subcommand("grid", "residual heat-grid to CSV");
    auto* g_check = gr->add_option("--check", go.check, "check id, e.g. eq2.flat or eq5");
    auto* g_pair = gr->add_option("--pair", go.pair,
                                  "catenoid_helicoid|plane_cylinder|rigid_motion");
    auto* g_scen = gr->add_option("--scenario", go.scenario, "pseudosphere|sphere|random");
    auto* g_sigma = gr->add_option("--sigma", go.sigma, "transversal angle, complex a+bi");
    auto* g_grid = gr->add_option("--grid", go.grid, "NxM or NxMxP");
    auto* g_tol = gr->add_option("--tol", go.tol, "pass tolerance");
    auto* g_out = gr->add_option("--out", go.out, "CSV file (default stdout)");
    gr->add_option("--config", go.config, "JSON config file (flags win)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (rep->parsed()) {
            if (!ro.config.empty()) {
                const json cfg = load_config(ro.config);
                reject_unknown_keys(cfg, {"scenario", "sigma", "grid", "checks", "perturb",
                                          "tol", "seed"});
                merge_key(cfg, r_scen, "scenario", ro.scenario);
                merge_key(cfg, r_sigma, "sigma", ro.sigma);
                merge_key(cfg, r_grid, "grid", ro.grid);
                merge_key(cfg, r_checks, "checks", ro.checks);
                merge_key(cfg, r_pert, "perturb", ro.perturb);
                merge_key(cfg, r_tol, "tol", ro.tol);
                merge_key(cfg, r_seed, "seed", ro.seed);
            }
            return cmd_report(ro);
        }
        if (idc->parsed()) {
            if (!io.config.empty()) {
                const json cfg = load_config(io.config);
                reject_unknown_keys(cfg, {"seed", "samples", "field_samples", "tol"});
                merge_key(cfg, i_seed, "seed", io.seed);
                merge_key(cfg, i_samp, "samples", io.samples);
                merge_key(cfg, i_field, "field_samples", io.field_samples);
                merge_key(cfg, i_tol, "tol", io.tol);
            }
            return cmd_identity(io);
        }
        if (pol->parsed()) {
            if (!po.config.empty()) {
                const json cfg = load_config(po.config);
                reject_unknown_keys(cfg, {"scenario", "sigma", "point", "tol"});
                merge_key(cfg, p_scen, "scenario", po.scenario);
                merge_key(cfg, p_sigma, "sigma", po.sigma);
                merge_key(cfg, p_point, "point", po.point);
                merge_key(cfg, p_tol, "tol", po.tol);
            }
            return cmd_poly(po);
        }
        if (lf->parsed()) {
            if (!lo.config.empty()) {
                const json cfg = load_config(lo.config);
                reject_unknown_keys(cfg, {"scenario", "sigma", "w0", "grid", "umin", "umax",
                                          "vmin", "vmax", "tol", "out"});
                merge_key(cfg, l_scen, "scenario", lo.scenario);
                merge_key(cfg, l_sigma, "sigma", lo.sigma);
                merge_key(cfg, l_w0, "w0", lo.w0);
                merge_key(cfg, l_grid, "grid", lo.grid);
                merge_key(cfg, l_umin, "umin", lo.umin);
                merge_key(cfg, l_umax, "umax", lo.umax);
                merge_key(cfg, l_vmin, "vmin", lo.vmin);
                merge_key(cfg, l_vmax, "vmax", lo.vmax);
                merge_key(cfg, l_tol, "tol", lo.tol);
                merge_key(cfg, l_out, "out", lo.out);
            }
            return cmd_leaf(lo);
        }
        if (gr->parsed()) {
            if (!go.config.empty()) {
                const json cfg = load_config(go.config);
                reject_unknown_keys(cfg, {"check", "pair", "scenario", "sigma", "grid",
                                          "tol", "out"});
                merge_key(cfg, g_check, "check", go.check);
                merge_key(cfg, g_pair, "pair", go.pair);
                merge_key(cfg, g_scen, "scenario", go.scenario);
                merge_key(cfg, g_sigma, "sigma", go.sigma);
                merge_key(cfg, g_grid, "grid", go.grid);
                merge_key(cfg, g_tol, "tol", go.tol);
                merge_key(cfg, g_out, "out", go.out);
            }
            return cmd_grid(go);
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const contactroll::degeneracy_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const contactroll::jet_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
