#include <iostream>

#include <CLI11.hpp>

#include "geoctl/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace geoctl::cli;
  CLI::App app{"geoctl: geometric control on polynomial frames"};
  app.require_subcommand(1);
  Options o;
  double step = 0, horizon = 0, fiber = 0;

  auto common = [&](CLI::App* c, bool needs_model = true) {
    auto* m = c->add_option("--model", o.model, "model file (JSON)");
    if (needs_model) m->required();
    c->add_option("--point", o.point, "comma-separated point, rationals allowed");
    c->add_option("--step", step, "integration step (default 1e-3)");
    c->add_option("--tol", o.tol, "tolerance (default 1e-6)");
    c->add_option("--seed", o.seed, "random seed");
    c->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    c->add_option("--out", o.out, "output path");
    c->add_option("--problem", o.problem, "problem block of the model file");
  };

  auto* analyze = app.add_subcommand("analyze", "growth vector and Cartan test at a point");
  common(analyze);
  auto* geodesic = app.add_subcommand("geodesic", "normal or abnormal extremal as CSV");
  common(geodesic);
  geodesic->add_option("--kind", o.kind, "normal or abnormal")->check(CLI::IsMember({"normal", "abnormal"}));
  geodesic->add_option("--covector", o.covector, "comma-separated initial covector");
  auto* hopt = geodesic->add_option("--horizon", horizon, "final time");
  auto* quotient = app.add_subcommand("quotient", "quotient by a coordinate projection");
  common(quotient);
  quotient->add_option("--keep", o.keep, "comma-separated kept coordinate indices");
  auto* prolong = app.add_subcommand("prolong", "Cartan prolongation");
  common(prolong);
  auto* duality = app.add_subcommand("duality-check", "asymmetry and duality verification");
  common(duality);
  auto* fopt = duality->add_option("--fiber", fiber, "fiber coordinate v of the base point");
  auto* steer = app.add_subcommand("steer", "steering to quotient targets");
  common(steer);
  steer->add_option("--keep", o.keep, "comma-separated kept coordinate indices");
  steer->add_option("--target", o.target, "comma-separated target on the quotient");
  auto* bundle = app.add_subcommand("bundle", "write the bundled models");
  bundle->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(parse);
  }
  for (auto* c : {analyze, geodesic, quotient, prolong, duality, steer})
    if (c->parsed() && c->count("--step")) o.step_override = step;
  if (hopt->count()) o.horizon = horizon;
  if (fopt->count()) o.fiber = fiber;
  return run(app.get_subcommands().front()->get_name(), o, std::cout, std::cerr);
}
