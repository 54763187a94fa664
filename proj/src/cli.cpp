#include "linesect/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "linesect/error.hpp"
#include "linesect/implicitize.hpp"
#include "linesect/intersect.hpp"
#include "linesect/io.hpp"
#include "linesect/numeric_backend.hpp"
#include "linesect/oracle.hpp"

namespace linesect::cli {

namespace {

using io::Json;

struct Options {
  std::string geometry_path;
  std::string lines_path;
  std::string qg;
  std::string strategy = "cond";
  std::string domain = "all";
  double confirm_tol = 1e-6;
  std::optional<double> rank_tol;
  int digits = 6;
  bool show_all = false;
  bool oracle_check = false;
  bool no_polish = false;
  bool row_scaling = false;
  int jobs = 1;
  int count = 11;
};

SelectionStrategy parse_strategy(const std::string& s) {
  if (s == "cond") return SelectionStrategy::conditioning;
  if (s == "first") return SelectionStrategy::first;
  if (s == "last") return SelectionStrategy::last;
  throw Error(ErrorKind::invalid_input, "field '--strategy': unknown strategy '" + s + "'");
}

std::vector<int> parse_int_list(const std::string& s, const char* flag) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::invalid_input, std::string("field '") + flag + "': bad integer '" + item + "'");
    }
  }
  return out;
}

ImplicitizeOptions implicitize_options(const Options& o, const io::Geometry& g) {
  ImplicitizeOptions opts;
  opts.family.rank_tol = o.rank_tol;
  opts.family.row_scaling = o.row_scaling;
  if (o.qg.empty()) return opts;
  const auto values = parse_int_list(o.qg, "--qg");
  if (std::holds_alternative<PowerCurve>(g)) {
    if (values.size() != 1) throw Error(ErrorKind::invalid_input, "field '--qg': curves take one degree");
    opts.curve_aux_degree = values[0];
  } else {
    if (values.size() != 2) throw Error(ErrorKind::invalid_input, "field '--qg': surfaces take 'q1,q2'");
    opts.surface_aux_degree = std::array<int, 2>{values[0], values[1]};
  }
  return opts;
}

IntersectConfig intersect_config(const Options& o) {
  IntersectConfig c;
  c.strategy = parse_strategy(o.strategy);
  c.confirm_tol = o.confirm_tol;
  c.polish = !o.no_polish;
  if (o.domain == "all") {
    c.domain = DomainFilter::all;
  } else if (o.domain == "unit") {
    c.domain = DomainFilter::unit;
  } else {
    throw Error(ErrorKind::invalid_input, "field '--domain': expected 'all' or 'unit'");
  }
  return c;
}

Json aux_degree_json(const MovingFamily& f) {
  if (f.kind == GeometryKind::curve) return f.aux.degree[0];
  return Json::array({f.aux.degree[0], f.aux.degree[1]});
}

Json family_metadata(const MovingFamily& f, const Options& o) {
  Json j;
  j["aux_degree"] = aux_degree_json(f);
  j["c_rows"] = f.c_rows;
  j["c_cols"] = f.c_cols;
  j["rank"] = f.rank;
  j["nullity"] = f.nullity();
  j["rank_tol"] = io::number(o.rank_tol.value_or(backend::default_rank_tol(f.c_rows, f.c_cols)), o.digits);
  return j;
}

template <class Geometry, int Dim>
Json line_block(const Geometry& geometry, const MovingFamily& family, const QueryLine<Dim>& line,
                std::size_t index, const IntersectConfig& config, const Options& o, bool& stage_error) {
  Json block;
  block["line"] = index;
  block["origin"] = Json::array();
  block["direction"] = Json::array();
  for (int d = 0; d < Dim; ++d) {
    block["origin"].push_back(io::number(line.origin[d], o.digits));
    block["direction"].push_back(io::number(line.direction[d], o.digits));
  }
  try {
    const auto result = intersect_line(geometry, family, line, config);
    block["strategy"] = to_string(result.strategy_used);
    block["selected_columns"] = result.selected_columns;
    Json records = Json::array();
    for (const auto& r : result.records) {
      if (!o.show_all && r.status != RecordStatus::confirmed) continue;
      records.push_back(io::record_to_json(r, o.digits, config.domain == DomainFilter::unit));
    }
    block["confirmed_count"] = result.confirmed().size();
    block["records"] = records;
    if (o.oracle_check) {
      try {
        if constexpr (Dim == 2) {
          const auto ref = oracle::oracle_curve(geometry, line);
          block["oracle_agreement"] = oracle::compare(result, ref, 1e-7).agree;
        } else {
          const auto ref = oracle::oracle_surface(geometry, line);
          block["oracle_agreement"] = oracle::compare(result, ref, 1e-6).agree;
          if (!ref.warnings.empty()) block["oracle_warnings"] = ref.warnings;
        }
      } catch (const Error& e) {
        block["oracle_agreement"] = false;
        block["oracle_error"] = e.what();
      }
    }
  } catch (const Error& e) {
    stage_error = true;
    block["error"] = e.what();
  }
  return block;
}

template <class Geometry, int Dim>
Json run_lines(const Geometry& geometry, const MovingFamily& family,
               const std::vector<io::LineSpec>& specs, const IntersectConfig& config,
               const Options& o, bool& stage_error) {
  std::vector<QueryLine<Dim>> lines;
  for (std::size_t i = 0; i < specs.size(); ++i) lines.push_back(io::to_line<Dim>(specs[i], i));

  std::vector<Json> blocks(lines.size());
  std::vector<char> errors(lines.size(), 0);
  const auto workers = static_cast<std::size_t>(std::max(1, o.jobs));
  auto work = [&](std::size_t first) {
    for (std::size_t i = first; i < lines.size(); i += workers) {
      bool err = false;
      blocks[i] = line_block(geometry, family, lines[i], i, config, o, err);
      errors[i] = err ? 1 : 0;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  stage_error = std::any_of(errors.begin(), errors.end(), [](char e) { return e != 0; });
  Json results = Json::array();
  for (auto& b : blocks) results.push_back(std::move(b));
  return results;
}

int cmd_intersect(const Options& o, std::ostream& out) {
  const auto input = io::read_geometry_file(o.geometry_path);
  const auto specs = io::read_lines_file(o.lines_path);
  const auto config = intersect_config(o);
  const auto opts = implicitize_options(o, input.geometry);

  bool stage_error = false;
  Json report;
  report["geometry"] = input.kind;
  std::visit(
      [&](const auto& g) {
        const MovingFamily family = implicitize(g, opts);
        Json pipeline = family_metadata(family, o);
        pipeline["strategy"] = o.strategy;
        pipeline["confirm_tol"] = io::number(o.confirm_tol, o.digits);
        pipeline["complex_tol"] = io::number(config.complex_tol, o.digits);
        pipeline["domain"] = o.domain;
        pipeline["polish"] = config.polish;
        report["pipeline"] = pipeline;
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, PowerCurve>) {
          report["results"] = run_lines<PowerCurve, 2>(g, family, specs, config, o, stage_error);
        } else {
          report["results"] = run_lines<PowerSurface, 3>(g, family, specs, config, o, stage_error);
        }
      },
      input.geometry);
  out << report.dump(2) << "\n";
  return stage_error ? numerical_error : ok;
}

int cmd_implicitize(const Options& o, std::ostream& out) {
  const auto input = io::read_geometry_file(o.geometry_path);
  const auto opts = implicitize_options(o, input.geometry);
  Json report;
  std::visit(
      [&](const auto& g) {
        report["geometry"] = io::geometry_to_json(g);
        const MovingFamily family = implicitize(g, opts);
        Json warnings = Json::array();
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, PowerCurve>) {
          const int eff = g.effective_degree();
          report["effective_degree"] = eff;
          if (eff < g.degree()) {
            warnings.push_back("effective degree " + std::to_string(eff) + " below declared degree " +
                               std::to_string(g.degree()));
          }
        } else {
          const auto eff = g.effective_bidegree();
          report["effective_bidegree"] = {eff[0], eff[1]};
          if (eff != g.bidegree()) {
            warnings.push_back("effective bidegree (" + std::to_string(eff[0]) + ", " +
                               std::to_string(eff[1]) + ") below declared bidegree");
          }
        }
        Json meta = family_metadata(family, o);
        for (auto it = meta.begin(); it != meta.end(); ++it) report[it.key()] = it.value();
        report["summary"] = "C: " + std::to_string(family.c_rows) + "×" +
                            std::to_string(family.c_cols) + ", rank " + std::to_string(family.rank) +
                            ", nullity " + std::to_string(family.nullity());
        report["warnings"] = warnings;
        Json sv = Json::array();
        for (Eigen::Index i = 0; i < family.singular_values.size(); ++i) {
          sv.push_back(io::number(family.singular_values(i), o.digits));
        }
        report["singular_values"] = sv;
        Json vectors = Json::array();
        for (Eigen::Index i = 0; i < family.nullity(); ++i) {
          Json blocks = Json::array();
          for (int b = 0; b <= family.space_dim; ++b) {
            Json coeffs = Json::array();
            const Eigen::VectorXd block = family.block(i, b);
            for (Eigen::Index l = 0; l < block.size(); ++l) coeffs.push_back(io::number(block(l), o.digits));
            blocks.push_back(coeffs);
          }
          vectors.push_back(blocks);
        }
        report["family"] = vectors;
      },
      input.geometry);
  out << report.dump(2) << "\n";
  return ok;
}

std::string format_value(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", std::clamp(digits, 1, 17), io::round_sig(v, digits) + 0.0);
  return buf;
}

int cmd_sample(const Options& o, std::ostream& out) {
  const auto input = io::read_geometry_file(o.geometry_path);
  if (o.count < 1) throw Error(ErrorKind::invalid_input, "field '--count': must be at least 1");
  const auto params = uniform_params(o.count);
  auto fmt = [&](double v) { return format_value(v, o.digits); };
  std::visit(
      [&](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, PowerCurve>) {
          out << "# theta x1 x2\n";
          for (double t : params) {
            const Vec2 x = g.evaluate(t);
            out << fmt(t) << ' ' << fmt(x[0]) << ' ' << fmt(x[1]) << '\n';
          }
        } else {
          out << "# theta1 theta2 x1 x2 x3\n";
          for (double t2 : params) {
            for (double t1 : params) {
              const Vec3 x = g.evaluate(Vec2(t1, t2));
              out << fmt(t1) << ' ' << fmt(t2) << ' ' << fmt(x[0]) << ' ' << fmt(x[1]) << ' '
                  << fmt(x[2]) << '\n';
            }
          }
        }
      },
      input.geometry);
  return ok;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"One-shot line intersections with polynomial curves and surfaces"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("geometry", o.geometry_path, "Geometry file")->required();
    sub->add_option("--qg", o.qg, "Auxiliary degree override ('q' or 'q1,q2')");
    sub->add_option("--rank-tol", o.rank_tol, "Relative rank threshold for the null space");
    sub->add_flag("--row-scaling", o.row_scaling, "Scale rows of C before the SVD");
    sub->add_option("--digits", o.digits, "Significant digits in the output")->check(CLI::Range(1, 17));
  };

  auto* intersect = app.add_subcommand("intersect", "Intersect lines with a curve or surface");
  add_common(intersect);
  intersect->add_option("lines", o.lines_path, "Lines file")->required();
  intersect->add_option("--strategy", o.strategy, "Square sub-pencil selection: cond, first, last");
  intersect->add_option("--confirm-tol", o.confirm_tol, "Relative residual for confirmed points");
  intersect->add_option("--domain", o.domain, "Parameter domain flagging: all, unit");
  intersect->add_flag("--show-all", o.show_all, "Include fictitious and discarded candidates");
  intersect->add_flag("--no-polish", o.no_polish, "Report eigenvalue-based records without Newton refinement");
  intersect->add_flag("--oracle-check", o.oracle_check, "Cross-check every line against the brute-force oracle");
  intersect->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* implicitize_cmd = app.add_subcommand("implicitize", "Dump the moving-line/plane family");
  add_common(implicitize_cmd);

  auto* sample = app.add_subcommand("sample", "Uniform parameter samples for plotting");
  sample->add_option("geometry", o.geometry_path, "Geometry file")->required();
  sample->add_option("count", o.count, "Samples per parameter direction");
  sample->add_option("--digits", o.digits, "Significant digits")->check(CLI::Range(1, 17));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  }

  try {
    if (intersect->parsed()) return cmd_intersect(o, out);
    if (implicitize_cmd->parsed()) return cmd_implicitize(o, out);
    return cmd_sample(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.kind()) ? input_error : numerical_error;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  }
}

}  // namespace linesect::cli
