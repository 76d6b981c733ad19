#include "levelgraph/cli.hpp"

#include "levelgraph/crater.hpp"
#include "levelgraph/tectonic.hpp"
#include "levelgraph/tower.hpp"
#include "levelgraph/voltage.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace lg {

namespace {

struct Common {
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out, dot, in;
};

struct GraphFlags {
    std::uint32_t p = 5;
    int deg = 1;
    std::int64_t l = 2, N = 1;
    int m = 0;
    bool exclude_special = false;
    std::vector<std::string> j_filter;
    std::optional<std::int64_t> disc;
    int max_abs_degree = 200;
    std::int64_t max_vertices = 200000;
    bool partial = false;

    BuildParams params(const Common& c) const {
        BuildParams bp;
        bp.p = p;
        bp.deg = deg;
        bp.l = l;
        bp.N = N;
        bp.m = m;
        bp.exclude_special_j = exclude_special;
        bp.j_filter = j_filter;
        bp.disc_filter = disc;
        bp.max_abs_degree = max_abs_degree;
        bp.max_vertices = max_vertices;
        bp.partial = partial;
        bp.seed = c.seed;
        bp.jobs = c.jobs;
        return bp;
    }
};

void add_common(CLI::App* app, Common& c, bool dot = true) {
    app->add_option("--seed", c.seed, "random seed")->capture_default_str();
    app->add_option("--jobs", c.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "JSON output file (default: stdout)");
    if (dot) app->add_option("--dot", c.dot, "DOT output file");
}

void add_graph(CLI::App* app, GraphFlags& g, bool with_m = true) {
    app->add_option("--p", g.p, "characteristic")->capture_default_str();
    app->add_option("--deg", g.deg, "base field degree")->capture_default_str();
    app->add_option("--l", g.l, "isogeny degree")->capture_default_str();
    app->add_option("--N", g.N, "prime-to-p level")->capture_default_str();
    if (with_m) app->add_option("--m", g.m, "p-power level")->capture_default_str();
    app->add_flag("--exclude-special-j", g.exclude_special, "drop j = 0 and j = 1728");
    app->add_option("--j-filter", g.j_filter, "j-invariants to keep")->delimiter(',');
    app->add_option("--disc-filter", g.disc, "keep curves with t^2 - 4q equal to this");
    app->add_option("--max-abs-degree", g.max_abs_degree, "cap on the absolute field degree")->capture_default_str();
    app->add_option("--max-vertices", g.max_vertices, "vertex budget")->capture_default_str();
    app->add_flag("--partial", g.partial, "skip CM groups over budget");
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path);
    f << text;
}

void emit(const Common& c, const json& j, std::ostream& out) { write_text(c.out, j.dump(2) + "\n", out); }

json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

json params_json(const BuildParams& bp) {
    return {{"p", bp.p}, {"deg", bp.deg}, {"l", bp.l}, {"N", bp.N}, {"m", bp.m}, {"seed", bp.seed}};
}

json crater_report(const MultiDiGraph& C, const std::vector<std::vector<int>>& comps,
                   std::vector<CraterProfile>& profiles) {
    json list = json::array();
    for (const auto& comp : comps) {
        CraterProfile P = classify_component(C, comp);
        json x = profile_to_json(P);
        std::set<std::string> js;
        for (int v : comp)
            if (!C.vertices[v].j.empty()) js.insert(C.vertices[v].j);
        if (!js.empty()) x["j"] = std::vector<std::string>(js.begin(), js.end());
        list.push_back(std::move(x));
        profiles.push_back(std::move(P));
    }
    return list;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Isogeny graphs with level structure"};
    app.require_subcommand(1);
    Common common;
    GraphFlags gf;

    CLI::App* build = app.add_subcommand("build", "build the isogeny graph");
    add_common(build, common);
    add_graph(build, gf);

    bool opposite = false;
    CLI::App* crater = app.add_subcommand("crater", "classify the crater components");
    add_common(crater, common);
    add_graph(crater, gf);
    crater->add_flag("--opposite", opposite, "swap blue and green");
    crater->add_option("--in", common.in, "classify a colored graph file instead of building one");

    int rmax = -1;
    std::string anchor;
    CLI::App* tower = app.add_subcommand("tower", "build and verify the p-tower");
    add_common(tower, common, false);
    add_graph(tower, gf, false);
    tower->add_option("--rmax", rmax, "levels above m0 (default: largest within budget)");
    tower->add_option("--anchor", anchor, "j-invariant of the anchor component");

    TectonicParams tp;
    auto add_tp = [&](CLI::App* a) {
        a->add_option("--omega", tp.omega)->required();
        a->add_option("--s", tp.s)->required();
        a->add_option("--t", tp.t)->required();
        a->add_option("--c", tp.c)->required();
    };
    SearchBounds sb;
    auto add_search = [&](CLI::App* a) {
        add_tp(a);
        a->add_option("--max-p", sb.max_p)->capture_default_str();
        a->add_option("--max-l", sb.max_l)->capture_default_str();
        a->add_option("--max-N", sb.max_N)->capture_default_str();
        a->add_option("--max-dK", sb.max_dK)->capture_default_str();
        a->add_option("--m", sb.m)->capture_default_str();
        a->add_option("--max-abs-degree", sb.max_abs_degree)->capture_default_str();
        a->add_option("--max-confirm", sb.max_confirm)->capture_default_str();
        a->add_flag("--confirm", sb.confirm, "realize witnesses as curve graphs");
    };
    CLI::App* tect = app.add_subcommand("tectonic", "abstract tectonic craters");
    tect->require_subcommand(1);
    CLI::App* gen = tect->add_subcommand("gen", "generate a tectonic crater");
    add_common(gen, common);
    add_tp(gen);
    CLI::App* recog = tect->add_subcommand("recognize", "recognize a colored graph file");
    add_common(recog, common, false);
    recog->add_option("--in", common.in, "graph JSON")->required();
    CLI::App* search = tect->add_subcommand("search", "search CM data realizing a tectonic crater");
    add_common(search, common, false);
    add_search(search);
    CMOracleInput ci;
    std::int64_t root = 0;
    CLI::App* prof = tect->add_subcommand("profile", "orders of x and its conjugate");
    add_common(prof, common, false);
    prof->add_option("--dK", ci.dK)->required();
    prof->add_option("--p", ci.p)->required();
    prof->add_option("--m", ci.m)->capture_default_str();
    prof->add_option("--a", ci.a)->required();
    prof->add_option("--b", ci.b)->required();
    CLI::Option* root_opt = prof->add_option("--root", root, "square root of the discriminant data mod p");

    CLI::App* inverse = app.add_subcommand("inverse", "same as tectonic search");
    add_common(inverse, common, false);
    add_search(inverse);

    bool tree_mode = false, full_group = false;
    CLI::App* volt = app.add_subcommand("voltage", "voltage assignment for N = 1");
    add_common(volt, common);
    add_graph(volt, gf);
    volt->add_flag("--tree-mode", tree_mode, "propagate bases along a spanning tree");
    volt->add_flag("--full-group", full_group, "derive over all units instead of the Aut quotient");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        sb.jobs = common.jobs;
        if (*build) {
            IsogenyGraph G = build_graph(gf.params(common));
            emit(common, G.to_json(), out);
            if (!common.dot.empty()) write_text(common.dot, to_dot(G.graph), out);
            return 0;
        }
        if (*crater) {
            json j = json::object();
            std::vector<CraterProfile> profiles;
            MultiDiGraph C;
            if (!common.in.empty()) {
                C = graph_from_json(read_json(common.in)).first;
                j["source"] = common.in;
                j["components"] = crater_report(C, components(C), profiles);
            } else {
                BuildParams bp = gf.params(common);
                IsogenyGraph G = build_graph(bp);
                color_edges(G, opposite);
                Crater cr = extract_crater(G);
                C = cr.graph;
                j["params"] = params_json(bp);
                j["components"] = crater_report(C, cr.components, profiles);
            }
            emit(common, j, out);
            if (!common.dot.empty()) write_text(common.dot, to_dot(C, vertex_classes(C, profiles)), out);
            return 0;
        }
        if (*tower) {
            TowerReport rep = build_tower(gf.params(common), rmax, anchor);
            emit(common, tower_to_json(rep), out);
            return rep.verified() ? 0 : 2;
        }
        if (*gen) {
            MultiDiGraph G = generate(tp);
            GraphMeta meta;
            meta.extra = {{"tectonic", params_to_json(canonical(tp))}};
            emit(common, to_json(G, meta), out);
            if (!common.dot.empty()) write_text(common.dot, to_dot(G), out);
            return 0;
        }
        if (*recog) {
            Recognition r = recognize(graph_from_json(read_json(common.in)).first);
            json j = {{"tectonic", r.ok}};
            if (r.ok) j["params"] = params_to_json(r.params);
            else j["reason"] = r.reason;
            emit(common, j, out);
            return 0;
        }
        if (*search || *inverse) {
            json list = json::array();
            for (const Witness& w : inverse_search(tp, sb)) list.push_back(witness_to_json(w));
            emit(common, {{"target", params_to_json(canonical(tp))}, {"witnesses", list}}, out);
            return 0;
        }
        if (*prof) {
            if (*root_opt) ci.root_p = root;
            emit(common, cm_profile_to_json(cm_order_profile(ci)), out);
            return 0;
        }
        if (*volt) {
            BuildParams bp = gf.params(common);
            IsogenyGraph level = build_graph(bp);
            IsogenyGraph base = voltage_base(level);
            VoltageData vd = compute_assignment(base, level, choose_bases(base, level, common.seed, tree_mode), common.jobs);
            AppendixReport rep = verify_appendix(vd, level);
            json j = voltage_to_json(vd, &rep);
            j["convention"] = full_group ? "full" : "aut-quotient";
            emit(common, j, out);
            if (!common.dot.empty()) write_text(common.dot, to_dot(derived_graph(vd, full_group)), out);
            return rep.matching == "neither" ? 2 : 0;
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const VerificationError& e) {
        err << "verification failed: " << e.what() << "\n";
        return 2;
    } catch (const BudgetError& e) {
        err << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace lg
