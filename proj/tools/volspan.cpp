// Command-line front end: subcommand parsing only; the work happens in the
// harness dispatch so tests can drive the same paths in-process.

#include <map>
#include <string>

#include <CLI11.hpp>

#include "volspan/harness.hpp"

namespace {

void add_arg(CLI::App* cmd, std::map<std::string, std::string>& sink, const std::string& key,
             const std::string& help, bool required = false) {
    auto* opt = cmd->add_option_function<std::string>(
        "--" + key, [&sink, key](const std::string& v) { sink[key] = v; }, help);
    if (required) opt->required();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"volumetric spanner toolkit"};
    app.require_subcommand(1);

    std::map<std::string, std::string> args;
    std::string command;

    auto* mvee = app.add_subcommand("mvee", "approximate minimum-volume enclosing ellipsoid");
    add_arg(mvee, args, "input", "points file (csv or json)", true);
    add_arg(mvee, args, "eps", "approximation parameter (default 1e-6)");
    add_arg(mvee, args, "out", "ellipsoid json output", true);
    mvee->callback([&] { command = "mvee"; });

    auto* john = app.add_subcommand("john", "John decomposition weights");
    add_arg(john, args, "input", "points file", true);
    add_arg(john, args, "tol", "residual tolerance (default 1e-6)");
    add_arg(john, args, "eps", "positioning accuracy (default 1e-6)");
    add_arg(john, args, "out", "weights csv output", true);
    john->callback([&] { command = "john"; });

    auto* spanner = app.add_subcommand("spanner", "volumetric spanner constructions");
    spanner->require_subcommand(1);

    auto* exact = spanner->add_subcommand("exact", "deterministic 12d spanner");
    add_arg(exact, args, "input", "points file", true);
    add_arg(exact, args, "out", "spanner json output", true);
    exact->callback([&] { command = "spanner-exact"; });

    auto* fast = spanner->add_subcommand("fast", "randomized recursive spanner");
    add_arg(fast, args, "input", "points file", true);
    add_arg(fast, args, "seed", "rng seed (default 0)");
    add_arg(fast, args, "c-sample", "per-level sample multiplier (default 10)");
    add_arg(fast, args, "threshold", "base-case cutoff (default derived)");
    add_arg(fast, args, "retries", "per-level retry cap (default 64)");
    add_arg(fast, args, "stats", "per-level stats csv");
    add_arg(fast, args, "out", "spanner json output", true);
    fast->callback([&] { command = "spanner-fast"; });

    auto* bary = spanner->add_subcommand("barycentric", "C-approximate barycentric basis");
    add_arg(bary, args, "input", "points file", true);
    add_arg(bary, args, "C", "approximation factor (default 2)");
    add_arg(bary, args, "out", "basis json output", true);
    bary->callback([&] { command = "spanner-barycentric"; });

    auto* sample = app.add_subcommand("sample", "hit-and-run sampling");
    add_arg(sample, args, "body", "box | ball | simplex | halfspaces (default box)");
    add_arg(sample, args, "dim", "dimension for builtin bodies");
    add_arg(sample, args, "radius", "body scale / bounding radius (default 1)");
    add_arg(sample, args, "density", "uniform | exp (default uniform)");
    add_arg(sample, args, "tilt-file", "csv row with the exp tilt direction");
    add_arg(sample, args, "halfspaces", "csv rows a_1..a_d,b meaning a.x <= b");
    add_arg(sample, args, "interior-file", "csv row with a strictly interior point");
    add_arg(sample, args, "n", "sample count (default 1000)");
    add_arg(sample, args, "burn-in", "chain burn-in (default 100 d^2)");
    add_arg(sample, args, "thinning", "steps between kept samples (default d^2)");
    add_arg(sample, args, "seed", "rng seed (default 0)");
    add_arg(sample, args, "out", "samples csv output", true);
    sample->callback([&] { command = "sample"; });

    auto* blo = app.add_subcommand("blo", "bandit linear optimization");
    blo->require_subcommand(1);
    auto* run = blo->add_subcommand("run", "GeometricHedge with spanner exploration");
    add_arg(run, args, "actions", "action set points file", true);
    add_arg(run, args, "adversary", "random | fixed:<loss csv> (default random)");
    add_arg(run, args, "T", "horizon (default 1024)");
    add_arg(run, args, "seeds", "number of seeded runs (default 1)");
    add_arg(run, args, "seed", "base seed (default 0)");
    add_arg(run, args, "gamma", "exploration mass or 'auto'");
    add_arg(run, args, "eta", "learning rate or 'auto'");
    add_arg(run, args, "c-sample", "spanner sample multiplier (default 8)");
    add_arg(run, args, "uniform-baseline", "1 = explore uniformly over all actions");
    add_arg(run, args, "out", "output directory", true);
    run->callback([&] { command = "blo-run"; });

    auto* verify = app.add_subcommand("verify", "standalone spanner checker");
    add_arg(verify, args, "spanner", "spanner json", true);
    add_arg(verify, args, "points", "points file", true);
    add_arg(verify, args, "tol", "violation tolerance (default 1e-6)");
    add_arg(verify, args, "out", "optional report json");
    verify->callback([&] { command = "verify"; });

    CLI11_PARSE(app, argc, argv);

    return volspan::dispatch({command, args});
}
