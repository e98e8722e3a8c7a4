#include "discwalk/cli.hpp"

#include "discwalk/errors.hpp"
#include "discwalk/matrix_walk.hpp"
#include "discwalk/sketches.hpp"
#include "discwalk/sparsify.hpp"
#include "discwalk/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace discwalk::cli {

namespace {

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

bool blank_or_comment(std::string& line) {
  const auto hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

long parse_index(const std::string& tok, long line) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + tok + "'", line);
  }
  if (pos != tok.size()) throw ParseError("expected an integer, got '" + tok + "'", line);
  return v;
}

double parse_real(const std::string& tok, long line) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + tok + "'", line);
  }
  if (pos != tok.size()) throw ParseError("expected a number, got '" + tok + "'", line);
  return v;
}

}  // namespace

Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  long n = -1;
  bool directed = false;
  std::map<std::pair<Index, Index>, double> merged;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (n < 0) {
      if (tok[0] != "n" || tok.size() < 2 || tok.size() > 3)
        throw ParseError("expected header 'n <count> [directed]'", lineno);
      n = parse_index(tok[1], lineno);
      if (n < 0) throw ParseError("negative vertex count", lineno);
      if (tok.size() == 3) {
        if (tok[2] == "directed")
          directed = true;
        else if (tok[2] != "undirected")
          throw ParseError("unknown header flag '" + tok[2] + "'", lineno);
      }
      continue;
    }
    if (tok.size() < 2 || tok.size() > 3) throw ParseError("expected 'u v [w]'", lineno);
    Index u = parse_index(tok[0], lineno);
    Index v = parse_index(tok[1], lineno);
    const double w = tok.size() == 3 ? parse_real(tok[2], lineno) : 1.0;
    if (u < 0 || v < 0 || u >= n || v >= n) throw ParseError("vertex out of range", lineno);
    if (u == v) throw ParseError("self-loop", lineno);
    if (!(w > 0) || !std::isfinite(w)) throw ParseError("weight must be positive and finite", lineno);
    if (!directed && u > v) std::swap(u, v);
    merged[{u, v}] += w;
  }
  if (n < 0) throw ParseError("missing header 'n <count>'", lineno);
  std::vector<Edge> edges;
  edges.reserve(merged.size());
  for (const auto& [k, w] : merged) edges.push_back({k.first, k.second, w});
  return Graph(n, std::move(edges), directed);
}

std::string serialize(const Graph& g) {
  std::string out = "n " + std::to_string(g.n()) + (g.directed() ? " directed\n" : "\n");
  for (const auto& e : g.edges()) out += std::to_string(e.u) + " " + std::to_string(e.v) + " " + fmt12(e.w) + "\n";
  return out;
}

std::vector<Vector> parse_vectors(const std::string& text, Index n) {
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  std::vector<Vector> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    std::istringstream ls(line);
    std::vector<double> vals;
    for (std::string t; ls >> t;) vals.push_back(parse_real(t, lineno));
    if (static_cast<Index>(vals.size()) != n)
      throw ParseError("expected " + std::to_string(n) + " entries, got " + std::to_string(vals.size()), lineno);
    out.push_back(Eigen::Map<const Vector>(vals.data(), n));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write '" + path + "'");
  f << text;
}

std::string coloring_text(const Vector& x) {
  std::string out;
  for (Index i = 0; i < x.size(); ++i) out += fmt12(x(i)) + "\n";
  return out;
}

SparsifyOptions sparsify_options(const RunConfig& c) {
  SparsifyOptions o;
  o.c_support = c.c_support;
  return o;
}

// Applies a connected-graph sparsifier per component.
Graph per_component(const Graph& g, const std::function<GraphSparsifier(const Graph&)>& fn) {
  return reweighted(g, per_component_scales(g, [&](const Graph& sub) { return fn(sub).scales; }));
}

struct Outcome {
  std::string output;
  std::string report;
  bool pass = true;
};

Outcome run_partial_color(const Graph& g) {
  if (g.directed()) throw InvalidInput("partial-color: undirected graph required");
  const SymMatrix R = matrix_function(laplacian(g), SpectralFunction::PinvSqrt);
  std::vector<Vector> vs;
  for (const auto& e : g.edges()) vs.push_back(R.dense() * incidence(g.n(), e.u, e.v));
  const DoubledFamily fam = DoubledFamily::rank_one(vs, g.weights());
  const Subspace H = Subspace::full(g.edge_count());
  const PartialColoring pc = partial_color(fam, H);
  Outcome o;
  o.output = coloring_text(pc.x);
  const double bound = partial_color_bound(g.n(), g.edge_count());
  nlohmann::ordered_json j;
  j["kind"] = "partial-color";
  j["norm"] = pc.norm;
  j["bound"] = bound;
  j["frozen"] = pc.frozen;
  j["iterations"] = pc.iterations;
  o.pass = pc.norm <= bound && 4 * pc.frozen >= g.edge_count();
  j["pass"] = o.pass;
  o.report = j.dump(2) + "\n";
  return o;
}

Outcome finish_graph(const RunConfig& c, const Graph& out, const ApproxReport& r) {
  Outcome o;
  o.output = serialize(out);
  if (c.check) {
    o.report = report_json(r) + "\n";
    o.pass = r.pass;
  }
  return o;
}

Outcome run_decompose(const RunConfig& c, const Graph& g) {
  if (g.directed()) throw InvalidInput("decompose: undirected graph required");
  const Decomposition d = expander_decompose(g, c.phi_target);
  Outcome o;
  o.output = "n " + std::to_string(g.n()) + "\n";
  double min_l2 = std::numeric_limits<double>::infinity();
  Index covered = 0;
  for (size_t k = 0; k < d.pieces.size(); ++k) {
    const auto& p = d.pieces[k];
    o.output += "# piece " + std::to_string(k) + " lambda2 " + fmt12(p.lambda2) + "\n";
    for (Index e : p.edges) {
      const Edge& ed = g.edge(e);
      o.output += std::to_string(ed.u) + " " + std::to_string(ed.v) + " " + fmt12(ed.w) + "\n";
    }
    min_l2 = std::min(min_l2, p.lambda2);
    covered += static_cast<Index>(p.edges.size());
  }
  if (c.check) {
    const double limit = 4.0 * std::log2(std::max<double>(2.0, static_cast<double>(g.n()))) + 1.0;
    nlohmann::ordered_json j;
    j["kind"] = "decompose";
    j["pieces"] = d.pieces.size();
    j["phi_target"] = d.phi_target;
    j["min_lambda2"] = d.pieces.empty() ? 0.0 : min_l2;
    j["max_multiplicity"] = d.max_multiplicity;
    o.pass = covered == g.edge_count() && (d.pieces.empty() || min_l2 >= d.phi_target - 1e-9) &&
             static_cast<double>(d.max_multiplicity) <= limit;
    j["pass"] = o.pass;
    o.report = j.dump(2) + "\n";
  }
  return o;
}

Outcome run_verify(const RunConfig& c, const Graph& g) {
  if (c.second_path.empty()) throw InvalidInput("verify: second graph required");
  const Graph h = parse_edge_list(read_file(c.second_path));
  ApproxReport r;
  if (c.kind == "spectral")
    r = check_spectral(g, h, c.epsilon);
  else if (c.kind == "standard")
    r = check_standard(g, h, c.epsilon);
  else if (c.kind == "uc")
    r = check_uc_undirected(g, h, c.epsilon);
  else if (c.kind == "sv")
    r = check_sv(g, h, c.epsilon);
  else if (c.kind == "resistance")
    r = check_resistance(g, h, c.epsilon);
  else if (c.kind == "sketch") {
    if (c.vectors_path.empty()) throw InvalidInput("verify --kind sketch needs --vectors");
    r = check_sketch(g, h, parse_vectors(read_file(c.vectors_path), g.n()), c.epsilon);
  } else
    throw InvalidInput("unknown report kind '" + c.kind + "'");
  Outcome o;
  o.report = report_json(r) + "\n";
  o.pass = r.pass;
  return o;
}

Outcome dispatch(const RunConfig& c) {
  if (!(c.epsilon > 0 && c.epsilon < 2)) throw InvalidInput("--epsilon must lie in (0, 2)");
  if (c.c_support <= 0) throw InvalidInput("--c-support must be positive");
  if (c.input_path.empty()) throw InvalidInput("input path required");
  const Graph g = parse_edge_list(read_file(c.input_path));
  const std::string& cmd = c.command;
  if (cmd == "partial-color") return run_partial_color(g);
  if (cmd == "decompose") return run_decompose(c, g);
  if (cmd == "verify") return run_verify(c, g);
  if (cmd == "sparsify") {
    if (g.directed()) throw InvalidInput("sparsify: undirected graph required");
    const Graph out = per_component(g, [&](const Graph& s) { return spectral_sparsify(s, c.epsilon, sparsify_options(c)); });
    return finish_graph(c, out, c.check ? check_spectral(g, out, c.epsilon) : ApproxReport{});
  }
  if (cmd == "uc") {
    if (g.directed()) throw InvalidInput("uc: undirected graph required");
    const Graph out = per_component(g, [&](const Graph& s) { return uc_sparsify(s, c.epsilon, sparsify_options(c)); });
    return finish_graph(c, out, c.check ? check_uc_undirected(g, out, c.epsilon) : ApproxReport{});
  }
  if (cmd == "sv") {
    const SvSparsifier r = sv_sparsify(g, c.epsilon, c.phi_target, sparsify_options(c));
    return finish_graph(c, r.graph, c.check ? check_sv(g, r.graph, c.epsilon) : ApproxReport{});
  }
  if (cmd == "sketch") {
    if (c.vectors_path.empty()) throw InvalidInput("sketch needs --vectors");
    const std::vector<Vector> K = parse_vectors(read_file(c.vectors_path), g.n());
    SketchOptions so;
    so.c_accuracy = c.c_accuracy;
    so.phi_target = c.phi_target;
    const SketchResult r = sketch(g, K, c.epsilon, so);
    return finish_graph(c, r.graph, c.check ? check_sketch(g, r.graph, K, c.c_accuracy * c.epsilon) : ApproxReport{});
  }
  if (cmd == "resist") {
    ResistanceOptions ro;
    ro.c_accuracy = c.c_accuracy;
    ro.phi_target = c.phi_target;
    const ResistanceResult r = resistance_sparsify(g, c.epsilon, ro);
    return finish_graph(c, r.graph, c.check ? check_resistance(g, r.graph, c.c_accuracy * c.epsilon) : ApproxReport{});
  }
  throw InvalidInput("unknown command '" + cmd + "'");
}

}  // namespace

int run(const RunConfig& c) {
  try {
    const Outcome o = dispatch(c);
    if (!o.output.empty()) write_text(c.output_path, o.output);
    if (!o.report.empty() && (c.check || c.command == "verify")) write_text(c.report_path, o.report);
    return o.pass ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int main(int argc, char** argv) {
  CLI::App app{"Deterministic discrepancy walks and spectral sparsifiers"};
  app.require_subcommand(1);
  RunConfig c;
  std::optional<double> phi;
  const auto common = [&](CLI::App* sub, bool graph_out) {
    sub->add_option("input", c.input_path, "input edge list")->required();
    sub->add_option("--epsilon", c.epsilon, "target accuracy");
    sub->add_option("--c-support", c.c_support, "support constant of the halving loop");
    sub->add_option("--phi-target", phi, "expansion target of the decomposition");
    sub->add_option("--c-accuracy", c.c_accuracy, "accuracy constant for sketch and resist checks");
    sub->add_flag("--check", c.check, "verify the output and emit a JSON report");
    sub->add_option("--report", c.report_path, "report path (default: standard output)");
    if (graph_out) sub->add_option("--out", c.output_path, "output path (default: standard output)");
  };
  for (const char* name : {"partial-color", "sparsify", "uc", "sv", "decompose"}) common(app.add_subcommand(name), true);
  CLI::App* sk = app.add_subcommand("sketch");
  common(sk, true);
  sk->add_option("--vectors", c.vectors_path, "constraint vectors, one per line")->required();
  common(app.add_subcommand("resist"), true);
  CLI::App* ver = app.add_subcommand("verify");
  common(ver, false);
  ver->add_option("candidate", c.second_path, "candidate edge list")->required();
  ver->add_option("--kind", c.kind, "spectral, standard, uc, sv, sketch or resistance");
  ver->add_option("--vectors", c.vectors_path, "constraint vectors for --kind sketch");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  c.command = app.get_subcommands().front()->get_name();
  c.phi_target = phi;
  return run(c);
}

}  // namespace discwalk::cli
