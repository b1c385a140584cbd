#include "cslope/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cslope/classify.hpp"
#include "cslope/descriptor_io.hpp"
#include "cslope/maps.hpp"
#include "cslope/paths.hpp"
#include "cslope/solutions.hpp"
#include "cslope/spectral.hpp"

namespace cslope {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

nlohmann::json canonical_numbers(const nlohmann::json& j) {
  if (j.is_number_float()) {
    double x = j.get<double>();
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return std::stod(fmt::format("{:.12g}", x));
  }
  if (j.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : j) out.push_back(canonical_numbers(e));
    return out;
  }
  if (j.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = canonical_numbers(it.value());
    return out;
  }
  return j;
}

namespace {

using nlohmann::json;

constexpr int kOk = 0, kError = 1, kInconclusive = 2;

struct Refused : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(fmt::format("malformed {}: {}", what, e.what()));
  }
}

std::string num(double x) { return fmt::format("{:.12g}", x); }

std::string lambda_text(const VereJonesVerdict& v) {
  if (v.lambda_exact) {
    double val = v.lambda_exact->value();
    return fmt::format("{} ≈ {:.8g}", v.lambda_exact->text(), val);
  }
  return fmt::format("≈ {:.8g}", v.lambda);
}

json series_json(const std::optional<SeriesEval>& s) {
  if (!s) return nullptr;
  json j{{"z", s->z}, {"partial", s->value_partial}, {"terms", s->terms_used}};
  j["tail_bound"] = s->tail_bound ? json(*s->tail_bound) : json(nullptr);
  j["total"] = s->total() ? json(*s->total()) : json(nullptr);
  j["divergent"] = s->divergent_by_ratio || s->divergent_by_partial_sums;
  if (!s->tail_note.empty()) j["tail_note"] = s->tail_note;
  return j;
}

json verdict_json(const VereJonesVerdict& v) {
  json j;
  j["class"] = v.cls ? json(class_name(*v.cls)) : json("inconclusive");
  j["confidence"] = confidence_name(v.confidence);
  j["lambda"] = lambda_text(v);
  j["lambda_value"] = v.lambda;
  if (v.lambda_exact) j["lambda_symbolic"] = v.lambda_exact->text();
  j["summable"] = tri_name(v.summable);
  if (!v.summable_reason.empty()) j["summable_reason"] = v.summable_reason;
  j["method"] = v.method;
  const auto& e = v.evidence;
  j["evidence"] = {{"R", e.R},
                   {"Phi", e.Phi},
                   {"F_at_R", series_json(e.F_at_R)},
                   {"Fprime_at_R", series_json(e.Fprime_at_R)},
                   {"m_RN_limit", e.limit_m_R_n},
                   {"limit_zero", e.limit_zero},
                   {"F_exact", e.F_exact ? json(*e.F_exact) : json(nullptr)},
                   {"notes", e.notes}};
  return j;
}

json solution_json(const LambdaSolution& v, std::size_t show) {
  json j;
  j["lambda"] = v.lambda;
  j["method"] = v.method;
  json pre = json::array();
  for (std::size_t k = 0; k < v.indices.size() && k < show; ++k) pre.push_back({v.indices[k], v.prefix[k]});
  j["prefix"] = pre;
  j["prefix_length"] = v.indices.size();
  json tail = json::array();
  for (const auto& t : v.tail) tail.push_back({{"alpha", t.alpha}, {"w0", t.w0}, {"w1", t.w1}, {"side", t.side}});
  j["tail"] = tail;
  j["summable"] = tri_name(v.summable);
  j["summable_evidence"] = v.summable_evidence;
  j["tail_ratio"] = v.tail_ratio;
  auto total = v.total();
  j["total"] = total ? json(*total) : json(nullptr);
  j["residual_sup"] = v.residual_sup;
  j["notes"] = v.notes;
  return j;
}

std::vector<std::size_t> parse_schedule(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("schedule must be a comma list of positive sizes, got '" + s + "'");
    out.push_back(std::stoul(tok));
    if (out.back() == 0 || (out.size() > 1 && out.back() <= out[out.size() - 2]))
      throw std::invalid_argument("schedule sizes must increase strictly");
  }
  if (out.empty()) throw std::invalid_argument("empty schedule");
  return out;
}

std::map<std::string, std::string> parse_params(const std::string& s) {
  std::map<std::string, std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("params must look like key=value[,key=value], got '" + s + "'");
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

/// Map descriptors also arrive wrapped in a command envelope or a gallery record.
MarkovMap load_map(const json& j0) {
  json j = j0;
  if (j.is_object() && j.contains("command") && j.contains("result")) j = j["result"];
  if (j.is_object() && j.contains("descriptor") && j.contains("name")) {
    if (j["descriptor"].is_null()) throw std::invalid_argument("gallery entry has no map geometry (matrix only)");
    j = j["descriptor"];
  }
  return MarkovMap::from_json(j);
}

struct Input {
  std::string family, matrix_file;
  CountableMatrix matrix;
  std::optional<FamilyDescriptor> fam;
  std::string hash_source;

  void add(CLI::App* sub) {
    auto* f = sub->add_option("--family", family, "family descriptor, e.g. boundary_n:1,1,3");
    auto* m = sub->add_option("--matrix", matrix_file, "matrix descriptor JSON file");
    f->excludes(m);
  }
  void load() {
    if (family.empty() == matrix_file.empty()) throw std::invalid_argument("give exactly one of --family or --matrix");
    if (!family.empty()) {
      fam = FamilyDescriptor::parse(family);
      matrix = fam->matrix();
      hash_source = family;
    } else {
      hash_source = read_file(matrix_file);
      json j = parse_json(hash_source, "matrix descriptor");
      if (j.is_object() && j.contains("command") && j.contains("result")) j = j["result"];
      if (j.is_object() && j.contains("matrix") && j.contains("name")) j = j["matrix"];
      matrix = matrix_from_json(j);
    }
  }
  json options() const {
    return {{"family", family.empty() ? json(nullptr) : json(family)},
            {"matrix", matrix_file.empty() ? json(nullptr) : json(matrix_file)}};
  }
};

struct Outcome {
  json result;
  std::string csv;  // empty when the command has no CSV form
  int status = kOk;
};

std::string hex64(std::uint64_t h) { return fmt::format("{:016x}", h); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"countable Markov shifts and interval maps of constant slope", "cslope"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_path, format = "json";
  bool seedless = false;
  app.add_option("--out", out_path, "write the result here instead of standard output");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--seedless", seedless, "assert that no randomness is used");

  Input in;
  std::string schedule_text;
  double tol = 1e-3;
  Index horizon = 400, base = 0;

  auto* entropy = app.add_subcommand("entropy", "Perron value by truncation schedule");
  in.add(entropy);
  entropy->add_option("--schedule", schedule_text, "comma list of truncation sizes");
  entropy->add_option("--tol", tol, "convergence tolerance");

  auto* classify = app.add_subcommand("classify", "Vere-Jones class");
  in.add(classify);
  classify->add_option("--base", base, "base index j");
  classify->add_option("--horizon", horizon, "path-count horizon");
  classify->add_option("--tol", tol, "tolerance");
  classify->add_option("--schedule", schedule_text, "comma list of truncation sizes");

  double lambda = 0.0;
  std::size_t n_trunc = 400, show = 20;
  double solve_tol = 1e-8;
  auto* eigsolve = app.add_subcommand("eigsolve", "positive lambda-solution");
  in.add(eigsolve);
  eigsolve->add_option("--lambda", lambda, "eigenvalue")->required();
  eigsolve->add_option("--n", n_trunc, "truncation size");
  eigsolve->add_option("--tol", solve_tol, "residual tolerance");
  eigsolve->add_option("--show", show, "entries printed");

  std::string map_file, sample_out;
  std::optional<double> lin_lambda;
  std::size_t window = 40, sample_points = 201;
  auto* linearize_cmd = app.add_subcommand("linearize", "conjugate map of constant slope");
  linearize_cmd->add_option("--map", map_file, "map descriptor JSON")->required();
  linearize_cmd->add_option("--lambda", lin_lambda, "slope (default: estimated Perron value)");
  linearize_cmd->add_option("--window", window, "elements in the window");
  linearize_cmd->add_option("--sample-points", sample_points, "grid points in the CSV sample");
  linearize_cmd->add_option("--sample-out", sample_out, "CSV sample of the linearized map");

  std::optional<Index> element;
  std::optional<int> order;
  std::string assignments_file, window_text, sequence_text;
  auto* perturb = app.add_subcommand("perturb", "window perturbation");
  perturb->add_option("--map", map_file, "map descriptor JSON")->required();
  auto* el_opt = perturb->add_option("--element", element, "element label");
  auto* ord_opt = perturb->add_option("--order", order, "order k (2k+1 laps)");
  auto* as_opt = perturb->add_option("--assignments", assignments_file, "JSON object label -> order");
  auto* seq_opt = perturb->add_option("--sequence", sequence_text, "tail multipliers a_n for the dyadic tent (e.g. A2)");
  perturb->add_option("--window", window_text, "centralized window a,b");
  el_opt->needs(ord_opt);
  ord_opt->needs(el_opt);
  el_opt->excludes(as_opt);
  el_opt->excludes(seq_opt);
  as_opt->excludes(seq_opt);

  std::string mode = "first_entrance", set_text;
  Index pi = 0, pj = 0, pn = 20;
  std::optional<Index> pk;
  auto* paths = app.add_subcommand("paths", "path-count coefficients");
  in.add(paths);
  paths->add_option("--mode", mode, "none, first_entrance, last_exit, taboo, taboo_set");
  paths->add_option("--i", pi, "start index");
  paths->add_option("--j", pj, "end index");
  paths->add_option("--k", pk, "taboo index");
  paths->add_option("--set", set_text, "taboo set P' as a comma list");
  paths->add_option("--n", pn, "largest length");

  std::size_t id_window = 8;
  Index id_n = 10;
  auto* identities = app.add_subcommand("identities", "renewal and decomposition identities");
  in.add(identities);
  identities->add_option("--n", id_n, "largest length");
  identities->add_option("--window-size", id_window, "indices checked");

  std::string gname, gparams;
  bool expected = false, list = false;
  auto* gallery_cmd = app.add_subcommand("gallery", "named example maps");
  gallery_cmd->add_option("--name", gname, "entry name");
  gallery_cmd->add_option("--params", gparams, "key=value[,key=value]");
  gallery_cmd->add_flag("--expected", expected, "include the expected results record");
  gallery_cmd->add_flag("--list", list, "list the entry names");

  std::vector<std::string> argv_store{"cslope"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: invalid options: " << e.what() << "\n";
    return kError;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string command = sub->get_name();
  json options{{"format", format}, {"seedless", seedless}, {"out", out_path.empty() ? json(nullptr) : json(out_path)}};
  std::string hash_source;
  Outcome res;

  try {
    if (command == "entropy") {
      auto sched = schedule_text.empty() ? default_schedule() : parse_schedule(schedule_text);
      if (!(tol > 0)) throw std::invalid_argument("--tol must be positive");
      in.load();
      hash_source = in.hash_source;
      options.update(in.options());
      options["schedule"] = sched;
      options["tol"] = tol;
      auto s = perron_value(in.matrix, sched, tol);
      json sj = json::array();
      res.csv = "N,lambda\n";
      for (auto [n, l] : s.schedule) {
        sj.push_back({n, l});
        res.csv += fmt::format("{},{}\n", n, num(l));
      }
      res.result = {{"lambda_estimate", s.lambda_estimate},
                    {"lambda_lower", s.lambda_lower},
                    {"R_estimate", s.R_estimate},
                    {"entropy", std::log(s.lambda_estimate)},
                    {"converged", s.converged},
                    {"schedule", sj}};
      if (in.fam) {
        try {
          auto cf = classify_closed_form(*in.fam);
          if (cf.lambda_exact) res.result["lambda_exact"] = cf.lambda_exact->text();
        } catch (const std::invalid_argument&) {
        }
      }
      if (!s.converged) res.status = kInconclusive;
    } else if (command == "classify") {
      ClassifyOptions opt;
      opt.horizon = horizon;
      opt.tol = tol;
      if (!schedule_text.empty()) opt.schedule = parse_schedule(schedule_text);
      if (horizon < 10) throw std::invalid_argument("--horizon must be at least 10");
      in.load();
      hash_source = in.hash_source;
      options.update(in.options());
      options["base"] = base;
      options["horizon"] = horizon;
      options["tol"] = tol;
      options["schedule"] = opt.schedule;
      if (!in.matrix.index_set().contains(base)) throw std::invalid_argument("--base outside the index set");
      std::optional<VereJonesVerdict> cf;
      if (in.fam) {
        try {
          cf = classify_closed_form(*in.fam);
        } catch (const std::invalid_argument& e) {
          options["closed_form_note"] = e.what();
        }
      }
      auto nv = classify_numeric(in.matrix, base, opt);
      if (cf && contradicts(nv, *cf))
        throw std::logic_error(fmt::format("numeric verdict {} contradicts the closed form {}", class_name(*nv.cls), class_name(*cf->cls)));
      const auto& v = cf ? *cf : nv;
      res.result = verdict_json(v);
      res.result["numeric"] = verdict_json(nv);
      res.result["closed_form"] = cf.has_value();
      if (!v.cls) res.status = kInconclusive;
    } else if (command == "eigsolve") {
      if (!(lambda > 0)) throw std::invalid_argument("--lambda must be positive");
      if (n_trunc < 16) throw std::invalid_argument("--n must be at least 16");
      in.load();
      hash_source = in.hash_source;
      options.update(in.options());
      options["lambda"] = lambda;
      options["n"] = n_trunc;
      options["tol"] = solve_tol;
      options["show"] = show;
      std::optional<LambdaSolution> v;
      std::string route = "truncated";
      if (in.fam && in.fam->name == "banded_z") {
        v = solve_banded(to_double(in.fam->params[0]), to_double(in.fam->params[1]), lambda);
        route = "closed form";
      } else if (in.fam && in.fam->name == "boundary_n") {
        v = solve_banded(to_double(in.fam->params[0]), to_double(in.fam->params[1]), lambda, to_double(in.fam->params[2]));
        route = "closed form";
      } else if (in.fam && in.fam->name == "bt12") {
        if (lambda >= 4) v = bt12_solution(lambda);
        route = "closed form";
      } else {
        TruncatedSolveOptions o;
        o.n = n_trunc;
        o.tol = solve_tol;
        v = solve_truncated(in.matrix, lambda, o);
      }
      res.result["route"] = route;
      if (!v) {
        res.result["solution"] = nullptr;
        res.result["note"] = route == "closed form" ? "no positive lambda-solution exists" : "no positive lambda-solution found at this truncation";
        res.status = route == "closed form" ? kOk : kInconclusive;
      } else {
        auto rep = verify_solution(in.matrix, *v, in.matrix.index_set().prefix(std::min<std::size_t>(n_trunc / 2, 200)), solve_tol);
        res.result["solution"] = solution_json(*v, show);
        res.result["verify"] = {{"pass", rep.pass}, {"residual_sup", rep.residual_sup}, {"worst", rep.worst}, {"note", rep.note}};
        res.csv = "i,v\n";
        for (std::size_t k = 0; k < v->indices.size() && k < show; ++k) res.csv += fmt::format("{},{}\n", v->indices[k], num(v->prefix[k]));
        if (!rep.pass) res.status = kInconclusive;
      }
    } else if (command == "linearize") {
      if (window < 4) throw std::invalid_argument("--window must be at least 4");
      if (sample_points < 2) throw std::invalid_argument("--sample-points must be at least 2");
      hash_source = read_file(map_file);
      auto map = load_map(parse_json(hash_source, "map descriptor"));
      options["map"] = map_file;
      options["window"] = window;
      options["sample_points"] = sample_points;
      options["sample_out"] = sample_out.empty() ? json(nullptr) : json(sample_out);
      auto m = transition_matrix(map, window);
      double lam;
      if (lin_lambda) {
        lam = *lin_lambda;
      } else {
        auto v = classify_numeric(m, map.index_set().enumerate(0));
        if (!(v.lambda > 0)) throw Refused("linearize refused: no Perron value estimate; pass --lambda");
        lam = v.lambda;
      }
      options["lambda"] = lin_lambda ? json(*lin_lambda) : json(nullptr);
      auto v = solve_truncated(m, lam);
      if (!v) throw Refused(fmt::format("linearize refused: no positive lambda-solution at lambda = {}", num(lam)));
      ConstantSlopeMap s;
      try {
        s = linearize(map, *v, window);
      } catch (const std::invalid_argument& e) {
        throw Refused(e.what());
      }
      res.result = s.to_json();
      res.result["solution"] = solution_json(*v, 20);
      res.csv = "x,y\n";
      for (auto [x, y] : sample(s, sample_points)) res.csv += fmt::format("{},{}\n", num(x), num(y));
      if (!sample_out.empty()) {
        std::ofstream f(sample_out);
        if (!f) throw std::invalid_argument("cannot write " + sample_out);
        f << res.csv;
      }
    } else if (command == "perturb") {
      if (!element && assignments_file.empty() && sequence_text.empty())
        throw std::invalid_argument("give --element with --order, --assignments, or --sequence");
      std::optional<std::pair<double, double>> cw;
      if (!window_text.empty()) {
        auto comma = window_text.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("--window must be a,b");
        try {
          cw = std::pair{std::stod(window_text.substr(0, comma)), std::stod(window_text.substr(comma + 1))};
        } catch (const std::exception&) {
          throw std::invalid_argument("--window must be two numbers a,b");
        }
      }
      hash_source = read_file(map_file);
      auto map = load_map(parse_json(hash_source, "map descriptor"));
      options["map"] = map_file;
      options["element"] = element ? json(*element) : json(nullptr);
      options["order"] = order ? json(*order) : json(nullptr);
      options["assignments"] = assignments_file.empty() ? json(nullptr) : json(assignments_file);
      options["sequence"] = sequence_text.empty() ? json(nullptr) : json(sequence_text);
      options["window"] = window_text.empty() ? json(nullptr) : json(window_text);
      MarkovMap outm = map;
      if (!sequence_text.empty()) {
        if (cw) throw std::invalid_argument("--window applies to finite assignments only");
        outm = window_perturb_global(map, IntSequence::parse(sequence_text));
      } else {
        std::map<Index, int> as;
        if (element) {
          as[*element] = *order;
        } else {
          auto j = parse_json(read_file(assignments_file), "assignments");
          if (!j.is_object()) throw std::invalid_argument("assignments must be a JSON object label -> order");
          for (auto it = j.begin(); it != j.end(); ++it) {
            if (!it.value().is_number_integer()) throw std::invalid_argument("assignment orders must be integers");
            std::size_t used = 0;
            Index l = std::stoll(it.key(), &used);
            if (used != it.key().size()) throw std::invalid_argument("assignment keys must be element labels");
            as[l] = it.value().get<int>();
          }
        }
        outm = window_perturb_global(map, as, cw);
      }
      res.result = outm.to_json();
    } else if (command == "paths") {
      PathQuery q;
      q.mode = mode_from_name(mode);
      q.i = pi;
      q.j = pj;
      q.k = pk;
      if (!set_text.empty()) {
        std::stringstream ss(set_text);
        std::string tok;
        while (std::getline(ss, tok, ',')) q.set.push_back(std::stoll(tok));
      }
      if (pn < 0) throw std::invalid_argument("--n must be nonnegative");
      if (q.mode == PathMode::taboo && !pk) throw std::invalid_argument("taboo mode needs --k");
      if (q.mode == PathMode::taboo_set && q.set.empty()) throw std::invalid_argument("taboo_set mode needs --set");
      in.load();
      hash_source = in.hash_source;
      options.update(in.options());
      options["mode"] = mode_name(q.mode);
      options["i"] = pi;
      options["j"] = pj;
      options["k"] = pk ? json(*pk) : json(nullptr);
      options["set"] = q.set;
      options["n"] = pn;
      auto t = path_counts(in.matrix, q, pn);
      json vals = json::array();
      res.csv = "n,count\n";
      for (std::size_t n = 0; n < t.values.size(); ++n) {
        vals.push_back(count_to_json(t.values[n]));
        res.csv += fmt::format("{},{}\n", n, t.values[n].str());
      }
      res.result = {{"values", vals}, {"window", t.window.indices.size()}, {"window_method", t.window.method}};
    } else if (command == "identities") {
      if (id_n < 1 || id_window < 1) throw std::invalid_argument("--n and --window-size must be positive");
      in.load();
      hash_source = in.hash_source;
      options.update(in.options());
      options["n"] = id_n;
      options["window_size"] = id_window;
      auto rep = check_identities(in.matrix, in.matrix.index_set().prefix(id_window), id_n);
      json checks = json::array();
      for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"coefficients", c.coefficients}, {"first_failure", c.first_failure}});
      res.result = {{"all_pass", rep.all_pass()}, {"checks", checks}};
      if (!rep.all_pass()) res.status = kError;
    } else if (command == "gallery") {
      options["name"] = gname.empty() ? json(nullptr) : json(gname);
      options["params"] = gparams;
      options["expected"] = expected;
      if (list) {
        res.result = {{"names", gallery_names()}};
        hash_source = "";
      } else {
        if (gname.empty()) throw std::invalid_argument("gallery needs --name (or --list)");
        auto g = gallery(gname, parse_params(gparams));
        hash_source = gname + "|" + gparams;
        res.result = g.to_json(expected);
        if (expected) {
          // flat summary of the record
          res.result["class"] = res.result["expected"]["class"];
          res.result["entropy"] = res.result["expected"]["entropy"];
        }
      }
    }
    if (format == "csv" && res.csv.empty()) throw std::invalid_argument("command '" + command + "' has no CSV form");
  } catch (const Refused& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << command << ": " << e.what() << "\n";
    return kError;
  }

  std::string text;
  if (format == "csv") {
    text = fmt::format("# {} input_hash={}\n", command, hex64(fnv1a(hash_source))) + res.csv;
  } else {
    json doc{{"command", command}, {"input_hash", hex64(fnv1a(hash_source))}, {"options", options}, {"result", res.result},
             {"status", res.status == kOk ? "ok" : "inconclusive"}};
    text = canonical_numbers(doc).dump(2) + "\n";
  }
  if (out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << out_path << "\n";
      return kError;
    }
    f << text;
  }
  return res.status;
}

}  // namespace cslope
