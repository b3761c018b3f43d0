#include "dflow/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "dflow/csv.hpp"
#include "dflow/dynamics.hpp"
#include "dflow/errors.hpp"
#include "dflow/instance_io.hpp"
#include "dflow/instances.hpp"
#include "dflow/nash.hpp"
#include "dflow/optimal.hpp"
#include "dflow/poa.hpp"
#include "dflow/svg.hpp"

namespace dflow {
namespace {

struct Options {
  std::string input;
  std::string second;  // inflow file for simulate, range for sweep
  std::vector<std::string> assignments;
  std::string out;
  std::string format = "csv";
  std::string labels_out;
  double tol = 1e-9;
  double delta = 0.0;
  double horizon = 0.0;
  double mass = -1.0;
  int max_iter = 10000;
  int threads = 0;
  std::uint64_t seed = 0;
};

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number for " + what + ": '" + text + "'");
  }
}

void check_options(const Options& o) {
  if (!(o.tol > 0.0)) throw DomainError("--tol must be positive");
  if (o.max_iter < 1) throw DomainError("--max-iter must be at least 1");
  if (o.delta < 0.0) throw DomainError("--delta must be positive");
  if (o.format != "csv" && o.format != "svg") throw DomainError("--format must be csv or svg");
}

// Writes the artifact to --out (with a version sidecar) or to `out`.
void emit(const Options& o, const std::string& verb, const std::string& body, std::ostream& out) {
  if (o.out.empty()) {
    out << body;
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw InputError("io", "cannot write '" + o.out + "'");
  file << body;
  std::ofstream meta(o.out + ".meta.json", std::ios::binary);
  meta << "{\"tool\": \"dflow\", \"version\": \"" << kVersion << "\", \"verb\": \"" << verb
       << "\"}\n";
}

// Where summaries go: stdout when the artifact went to a file.
std::ostream& summary_stream(const Options& o, std::ostream& out, std::ostream& err) {
  return o.out.empty() ? err : out;
}

Network load(const std::string& path) { return validated(read_network(path)); }

// "name=value" pairs.
std::map<std::string, std::string> split_assignments(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const std::string& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("expected name=value, got '" + item + "'");
    }
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

// "a..b" (integer steps), "a..b:step" or "v1,v2,...".
std::vector<double> expand_values(const std::string& text, const std::string& name) {
  const auto dots = text.find("..");
  std::vector<double> values;
  if (dots != std::string::npos) {
    std::string rest = text.substr(dots + 2);
    double step = 1.0;
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      step = parse_double(rest.substr(colon + 1), name);
      rest = rest.substr(0, colon);
    }
    const double lo = parse_double(text.substr(0, dots), name);
    const double hi = parse_double(rest, name);
    if (!(step > 0.0) || hi < lo) throw DomainError("empty range for " + name);
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    if (count > 1000000) throw DomainError("range for " + name + " is too long");
    for (long i = 0; i <= count; ++i) values.push_back(lo + static_cast<double>(i) * step);
    return values;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(parse_double(item, name));
  if (values.empty()) throw DomainError("no values for " + name);
  return values;
}

FamilySpec family_spec(const std::string& family, const std::map<std::string, std::string>& kv,
                       std::uint64_t seed) {
  FamilySpec spec;
  spec.family = family;
  spec.seed = seed;
  for (const auto& [name, value] : kv) {
    if (name == "seed") {
      spec.seed = static_cast<std::uint64_t>(parse_double(value, name));
    } else {
      spec.params[name] = parse_double(value, name);
    }
  }
  return spec;
}

AnalyzeOptions analyze_options(const Options& o) {
  AnalyzeOptions a;
  a.tol = o.tol;
  a.max_iter = o.max_iter;
  if (o.delta > 0.0) a.delta = o.delta;
  return a;
}

std::string yes_no(bool v) { return v ? "true" : "false"; }

int cmd_validate(const Options& o, std::ostream& out) {
  const Network net = read_network(o.input);
  const ValidationReport report = validate(net);
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  if (!report.ok()) {
    std::string msg = "invalid network:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw InvalidNetwork(msg);
  }
  const Network pruned = validated(net);
  out << "ok: " << pruned.vertices.size() << " vertices, " << pruned.edges.size()
      << " edges, " << enumerate_paths(pruned).size() << " paths, parallel_path="
      << yes_no(is_parallel_path(pruned)) << '\n';
  return 0;
}

int cmd_nash(const Options& o, std::ostream& out, std::ostream& err) {
  const Network net = load(o.input);
  LayeredFlow flow;
  int sweeps = 0;
  if (is_parallel_path(net)) {
    flow = layered_nash_parallel(net);
  } else {
    FixedPointOptions fp;
    fp.tol = o.tol;
    fp.max_iter = o.max_iter;
    FixedPointResult res = layered_nash_general(net, fp);
    flow = std::move(res.flow);
    sweeps = res.sweeps;
  }
  const FlowOverTime sim = simulate(net, flow);
  const NashReport report = verify_nash(sim);
  const LayeredCheck layers = check_layered(sim, flow);

  std::ostringstream body;
  if (o.format == "svg") {
    Series s{"layer", {}, true};
    for (std::size_t i = 0; i < flow.thetas.size(); ++i) {
      s.points.push_back({flow.thetas[i], static_cast<double>(i)});
    }
    body << line_plot({s}, "Layer breakpoints", "theta", "layer");
  } else {
    write_layered_csv(body, net, flow);
  }
  emit(o, "nash", body.str(), out);

  std::ostream& sum = summary_stream(o, out, err);
  sum << "paths=" << flow.paths.size() << " sweeps=" << sweeps
      << " throughput=" << format_number(throughput(sim))
      << " last_theta=" << format_number(flow.last_theta())
      << " deadline_gap=" << format_number(layers.max_deadline_gap)
      << " nash=" << yes_no(report.is_nash) << " cost_monotone=" << yes_no(report.cost_monotone)
      << " phases=" << yes_no(report.phases_consistent)
      << " violations=" << report.violations.size() << '\n';
  for (const NashViolation& v : report.violations) {
    sum << "violation theta=" << format_number(v.theta)
        << " used=" << path_label(net, sim.paths[v.used_path])
        << " better=" << path_label(net, sim.paths[v.better_path]) << " reason=" << v.reason
        << '\n';
  }
  return 0;
}

int cmd_optimal(const Options& o, std::ostream& out, std::ostream& err) {
  const Network net = load(o.input);
  OptSolution sol;
  std::vector<std::string> names;
  if (is_parallel_path(net)) {
    const Network links_net = reduce_to_parallel_links(net);
    std::vector<Link> links;
    for (const Edge& e : links_net.edges) {
      links.push_back({e.transit, e.capacity, e.cost});
      names.push_back(e.id);
    }
    sol = o.mass >= 0.0 ? optimal_deadline_parallel(links, net.inflow_rate, o.mass)
                        : max_throughput_parallel(links, net.inflow_rate, net.deadline);
  } else {
    for (const Edge& e : net.edges) names.push_back(e.id);
    const double delta = o.delta > 0.0 ? o.delta : net.deadline / 256.0;
    if (o.mass >= 0.0) {
      const double d = time_expanded_min_deadline(net, o.mass, delta);
      const double steps = std::max(1.0, std::ceil(d / delta - 1e-9));
      sol = time_expanded_max_throughput(net, steps * delta, delta);
      sol.value = d;
    } else {
      sol = time_expanded_max_throughput(net, net.deadline, delta);
    }
  }
  std::ostringstream body;
  if (o.format == "svg") {
    std::vector<Series> series;
    for (const ScheduleEntry& e : sol.schedule) {
      const std::string name = names[e.link];
      auto it = std::find_if(series.begin(), series.end(),
                             [&](const Series& s) { return s.name == name; });
      if (it == series.end()) {
        series.push_back({name, {}, true});
        it = series.end() - 1;
      }
      it->points.push_back({e.start, e.rate});
      it->points.push_back({e.end, 0.0});
    }
    body << line_plot(series, "Optimal schedule", "time", "rate");
  } else {
    write_schedule_csv(body, sol, names);
  }
  emit(o, "optimal", body.str(), out);
  summary_stream(o, out, err) << (o.mass >= 0.0 ? "D_star=" : "M_star=")
                              << format_number(sol.value) << " method=" << to_string(sol.method)
                              << '\n';
  return 0;
}

std::string poa_header() {
  return "M_f,M_star,D,D_star,t_poa,m_poa,bound_t_2,bound_t_e,bound_m_e,equilibrium,optimum\n";
}

std::vector<std::string> poa_fields(const PoaReport& r) {
  return {format_number(r.M_f),       format_number(r.M_star),    format_number(r.D),
          format_number(r.D_star),    format_number(r.t_poa),     format_number(r.m_poa),
          to_string(r.t_at_most_2),   to_string(r.t_at_most_e_ratio),
          to_string(r.m_at_most_e_ratio), r.equilibrium,          r.optimum_method};
}

int cmd_poa(const Options& o, std::ostream& out) {
  const PoaReport r = analyze(load(o.input), analyze_options(o));
  emit(o, "poa", poa_header() + csv_row(poa_fields(r)), out);
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> given;
  for (const std::string& item : o.assignments) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("expected name=value, got '" + item + "'");
    }
    given.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  if (given.empty()) throw ParseError("sweep needs at least one name=range parameter");

  // Cartesian product in the order given, last parameter varying fastest.
  std::vector<std::vector<double>> axes;
  for (const auto& [name, text] : given) axes.push_back(expand_values(text, name));
  std::vector<std::vector<double>> grid{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : grid) {
      for (double v : axis) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    }
    grid = std::move(next);
  }

  const AnalyzeOptions aopts = analyze_options(o);
  std::vector<PoaReport> reports(grid.size());
  std::vector<std::string> errors(grid.size());
  std::vector<std::exception_ptr> failures(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        std::map<std::string, std::string> kv;
        for (std::size_t j = 0; j < given.size(); ++j) {
          kv[given[j].first] = format_number(grid[i][j]);
        }
        reports[i] = analyze(generate(family_spec(o.input, kv, o.seed)), aopts);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  unsigned n_threads = o.threads > 0 ? static_cast<unsigned>(o.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, grid.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::ostringstream body;
  if (o.format == "svg") {
    Series t{"t_poa", {}, false};
    Series m{"m_poa", {}, false};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      t.points.push_back({grid[i][0], reports[i].t_poa});
      m.points.push_back({grid[i][0], reports[i].m_poa});
    }
    body << line_plot({t, m}, "Prices of anarchy: " + o.input, given[0].first, "ratio");
  } else {
    std::vector<std::string> header{"family"};
    for (const auto& g : given) header.push_back(g.first);
    for (const char* col : {"M_f", "M_star", "D_star", "t_poa", "m_poa", "bound_t", "bound_m"}) {
      header.push_back(col);
    }
    body << csv_row(header);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const PoaReport& r = reports[i];
      std::vector<std::string> row{o.input};
      for (double v : grid[i]) row.push_back(format_number(v));
      const BoundFlag bound_t =
          r.t_at_most_e_ratio != BoundFlag::kNotApplicable ? r.t_at_most_e_ratio : r.t_at_most_2;
      for (const std::string& f :
           {format_number(r.M_f), format_number(r.M_star), format_number(r.D_star),
            format_number(r.t_poa), format_number(r.m_poa), to_string(bound_t),
            to_string(r.m_at_most_e_ratio)}) {
        row.push_back(f);
      }
      body << csv_row(row);
    }
  }
  emit(o, "sweep", body.str(), out);
  return 0;
}

int cmd_generate(const Options& o, std::ostream& out) {
  const FamilySpec spec = family_spec(o.input, split_assignments(o.assignments), o.seed);
  const Network net = generate(spec);
  emit(o, "generate", dump_network(net, meta_json(spec)), out);
  return 0;
}

std::vector<StepFunction> read_path_inflows(const std::string& path, const Network& net,
                                            const std::vector<Path>& paths) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::vector<StepFunction> inflows(paths.size());
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = parse_csv_line(line);
    if (f.size() != 4) throw ParseError("inflow row needs path,start,end,rate: " + line);
    std::size_t p = 0;
    while (p < paths.size() && path_label(net, paths[p]) != f[0]) ++p;
    if (p == paths.size()) throw ParseError("unknown path '" + f[0] + "'");
    const double start = parse_double(f[1], "start");
    const double end = parse_double(f[2], "end");
    const double rate = parse_double(f[3], "rate");
    if (start < 0.0 || !(end >= start)) throw ParseError("bad interval in row: " + line);
    if (rate < 0.0) throw NegativeRate("negative rate in row: " + line);
    inflows[p] = add(inflows[p], StepFunction::indicator(start, end, rate));
  }
  return inflows;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const Network net = load(o.input);
  const std::vector<Path> paths = enumerate_paths(net);
  std::vector<StepFunction> inflows = read_path_inflows(o.second, net, paths);
  PropagateOptions popts;
  popts.horizon = o.horizon;
  const FlowOverTime flow = propagate(net, paths, std::move(inflows), popts);
  std::ostringstream body;
  write_edge_csv(body, net, flow);
  emit(o, "simulate", body.str(), out);
  if (!o.labels_out.empty()) {
    std::ofstream labels(o.labels_out, std::ios::binary);
    if (!labels) throw InputError("io", "cannot write '" + o.labels_out + "'");
    write_label_csv(labels, net, flow);
  }
  const NashReport report = verify_nash(flow);
  summary_stream(o, out, err) << "throughput=" << format_number(throughput(flow))
                              << " first_late=" << format_number(first_late_particle(flow))
                              << " nash=" << yes_no(report.is_nash) << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deadline-constrained Nash flows over time"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--tol", o.tol, "Fixed-point tolerance")->capture_default_str();
    sub->add_option("--delta", o.delta, "Time-expansion step (default D/256)");
    sub->add_option("--max-iter", o.max_iter, "Fixed-point sweep limit")->capture_default_str();
    sub->add_option("--out", o.out, "Output file (default stdout)");
    sub->add_option("--format", o.format, "csv or svg")->capture_default_str();
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check an instance file");
  validate_cmd->add_option("instance", o.input)->required();

  auto* nash_cmd = app.add_subcommand("nash", "Layered Nash flow and its verification");
  nash_cmd->add_option("instance", o.input)->required();
  common(nash_cmd);

  auto* optimal_cmd = app.add_subcommand("optimal", "Optimal throughput or deadline");
  optimal_cmd->add_option("instance", o.input)->required();
  optimal_cmd->add_option("--mass", o.mass, "Compute the minimum deadline for this mass");
  common(optimal_cmd);

  auto* poa_cmd = app.add_subcommand("poa", "Prices of anarchy of one instance");
  poa_cmd->add_option("instance", o.input)->required();
  common(poa_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Prices of anarchy over a family grid");
  sweep_cmd->add_option("family", o.input)->required();
  sweep_cmd->add_option("params", o.assignments, "name=a..b[:step] or name=v1,v2")->required();
  sweep_cmd->add_option("--threads", o.threads, "Worker threads (default: all cores)");
  sweep_cmd->add_option("--seed", o.seed, "Seed for random families");
  common(sweep_cmd);

  auto* generate_cmd = app.add_subcommand("generate", "Write an instance of a family");
  generate_cmd->add_option("family", o.input)->required();
  generate_cmd->add_option("params", o.assignments, "name=value");
  generate_cmd->add_option("--seed", o.seed, "Seed for random families");
  generate_cmd->add_option("--out", o.out, "Output file (default stdout)");

  auto* simulate_cmd = app.add_subcommand("simulate", "Propagate given path inflows");
  simulate_cmd->add_option("instance", o.input)->required();
  simulate_cmd->add_option("inflows", o.second, "CSV rows path,start,end,rate")->required();
  simulate_cmd->add_option("--horizon", o.horizon, "Inflow horizon (default D)");
  simulate_cmd->add_option("--labels", o.labels_out, "Also write arrival label samples");
  simulate_cmd->add_option("--out", o.out, "Output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: category=usage message=" << e.what() << '\n';
    return 2;
  }

  try {
    check_options(o);
    if (*validate_cmd) return cmd_validate(o, out);
    if (*nash_cmd) return cmd_nash(o, out, err);
    if (*optimal_cmd) return cmd_optimal(o, out, err);
    if (*poa_cmd) return cmd_poa(o, out);
    if (*sweep_cmd) return cmd_sweep(o, out);
    if (*generate_cmd) return cmd_generate(o, out);
    if (*simulate_cmd) return cmd_simulate(o, out, err);
  } catch (const Error& e) {
    err << "error: category=" << e.category() << " message=" << e.what() << '\n';
    return e.is_input_error() ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: category=internal message=" << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace dflow
