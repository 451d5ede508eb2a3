#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "circlekms/builtins.hpp"
#include "circlekms/report.hpp"

namespace circlekms::cli {

namespace {

struct MapArgs {
  std::string path;
  std::string builtin;
  std::string alpha;
  bool assume_exact = false;
};

struct Options {
  MapArgs map;
  std::size_t depth = 50;
  std::size_t catalog_depth = 50;
  std::size_t n_max = 6;
  std::size_t samples = 100;
  std::size_t resolution = 4096;
  std::uint64_t seed = kDefaultSeed;
  std::size_t class_index = 0;
  std::string q;
  std::string output;
  std::string csv;
  std::string name;
};

Rational parse_q(const std::string& text) {
  const auto q = parse_rational(text);
  if (!q) throw ValidationError("malformed q '" + text + "'");
  if (*q <= 0 || *q >= 1) throw ValidationError("q = " + text + " outside (0,1)");
  return *q;
}

std::optional<Rational> parse_alpha(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto a = parse_rational(text);
  if (!a) throw ValidationError("malformed alpha '" + text + "'");
  return a;
}

CircleMapPL load_map(const MapArgs& m) {
  if (!m.path.empty() && !m.builtin.empty()) throw ValidationError("give either --map or --builtin, not both");
  if (!m.path.empty()) {
    std::ifstream in(m.path);
    if (!in) throw ValidationError("cannot read map file '" + m.path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto map = parse_map(text);
    if (m.assume_exact && !map.assume_exact()) map = CircleMapPL::make(map.breakpoints(), map.values(), true);
    return map;
  }
  if (m.builtin.empty()) throw ValidationError("no map: use --map FILE or --builtin NAME");
  return builtins::by_name(m.builtin, parse_alpha(m.alpha), m.assume_exact);
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
}

void add_map_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--map", o.map.path, "map spec file (cmap v1)");
  cmd->add_option("--builtin", o.map.builtin, "built-in map: example5, tent, doubling");
  cmd->add_option("--alpha", o.map.alpha, "slope for example5, p/q");
  cmd->add_flag("--assume-exact", o.map.assume_exact, "treat the map as exact");
  cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
  cmd->add_option("-o,--output", o.output, "output file (default stdout)");
}

Json with_map(const CircleMapPL& map, Json body) {
  body["map"] = map_json(map);
  return body;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"KMS states of piecewise linear circle maps"};
  app.require_subcommand(1);
  Options o;

  auto* example = app.add_subcommand("example", "print a built-in map spec");
  example->add_option("--name", o.name, "example5, tent or doubling")->required();
  example->add_option("--alpha", o.map.alpha, "slope for example5, p/q");
  example->add_flag("--assume-exact", o.map.assume_exact, "set assume-exact in the spec");
  example->add_option("-o,--output", o.output, "output file (default stdout)");

  auto* classify_cmd = app.add_subcommand("classify", "KMS classification report");
  add_map_options(classify_cmd, o);
  classify_cmd->add_option("--depth", o.depth, "certificate depth")->capture_default_str();
  classify_cmd->add_option("--n-max", o.n_max, "largest iterate for entropy bounds")->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "classification plus the measure of maximal entropy");
  add_map_options(analyze, o);
  analyze->add_option("--depth", o.depth, "certificate depth")->capture_default_str();
  analyze->add_option("--n-max", o.n_max, "largest iterate for entropy bounds")->capture_default_str();
  analyze->add_option("--resolution", o.resolution, "CDF grid size")->capture_default_str();

  auto* entropy = app.add_subcommand("entropy", "topological entropy");
  add_map_options(entropy, o);
  entropy->add_option("--n-max", o.n_max, "largest iterate for entropy bounds")->capture_default_str();

  auto* measure = app.add_subcommand("measure", "atomic conformal measure of one class");
  add_map_options(measure, o);
  measure->add_option("--class", o.class_index, "class index")->required();
  measure->add_option("--q", o.q, "q = e^{-beta} as p/q")->required();
  measure->add_option("--depth,--K", o.depth, "preimage truncation depth")->default_val(3);
  measure->add_option("--catalog-depth", o.catalog_depth, "certificate depth")->capture_default_str();
  measure->add_option("--n-max", o.n_max, "largest iterate for entropy bounds")->capture_default_str();
  measure->add_option("--csv", o.csv, "atoms CSV file");

  auto* verify = app.add_subcommand("verify", "exact KMS and conformality residuals");
  add_map_options(verify, o);
  verify->add_option("--q", o.q, "q = e^{-beta} as p/q")->required();
  verify->add_option("--depth,--K", o.depth, "preimage truncation depth")->default_val(3);
  verify->add_option("--samples", o.samples, "pairs, bisections and scaling sets per class")->capture_default_str();
  verify->add_option("--catalog-depth", o.catalog_depth, "certificate depth")->capture_default_str();
  verify->add_option("--n-max", o.n_max, "largest iterate for entropy bounds")->capture_default_str();

  std::vector<const char*> argv{"circlekms"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (example->parsed()) {
      emit(format_map(builtins::by_name(o.name, parse_alpha(o.map.alpha), o.map.assume_exact)), o.output, out);
    } else if (classify_cmd->parsed() || analyze->parsed()) {
      const auto map = load_map(o.map);
      const auto report = classify(map, o.depth, o.n_max, o.seed);
      Json j = with_map(map, report_json(report));
      if (analyze->parsed()) {
        j["maximal_measure"] = maximal_measure_json(maximal_measure(map, report.entropy, o.resolution, 1e-9, o.seed));
      }
      emit(dump_canonical(j), o.output, out);
    } else if (entropy->parsed()) {
      const auto map = load_map(o.map);
      emit(dump_canonical(with_map(map, Json{{"entropy", entropy_json(compute_entropy(map, o.n_max, 64, o.seed))}})),
           o.output, out);
    } else if (measure->parsed()) {
      const auto map = load_map(o.map);
      const Rational q = parse_q(o.q);
      const auto catalog = critical_catalog(map, o.catalog_depth);
      if (o.class_index >= catalog.classes.size()) {
        throw ValidationError("no class " + std::to_string(o.class_index) + " (the map has " +
                              std::to_string(catalog.classes.size()) + ")");
      }
      const auto h = compute_entropy(map, o.n_max, 64, o.seed);
      const auto m = class_measure(map, catalog, o.class_index, InverseTemperature::from_q(q), o.depth, h);
      if (!o.csv.empty()) emit(atoms_csv(m, catalog), o.csv, out);
      emit(dump_canonical(with_map(map, Json{{"measure", measure_json(m)}})), o.output, out);
    } else if (verify->parsed()) {
      const auto map = load_map(o.map);
      const Rational q = parse_q(o.q);
      const auto catalog = critical_catalog(map, o.catalog_depth);
      const auto h = compute_entropy(map, o.n_max, 64, o.seed);
      const auto v = verify_all(map, catalog, q, o.depth, h, o.samples, o.seed);
      emit(dump_canonical(with_map(map, Json{{"verification", verification_json(v)}})), o.output, out);
    }
  } catch (const ResourceError& e) {
    err << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace circlekms::cli
