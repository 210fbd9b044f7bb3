#include "rdplab/config.hpp"

#include <cmath>
#include <fstream>

#include "rdp/error.hpp"

namespace rdplab {

const std::vector<std::string> kTasks = {"capacity_sweep", "green_check",   "wiener_classify",
                                         "relaxed_solve",  "energy_verify", "lemma_3_4"};

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const char* type_name(const json& j) { return j.type_name(); }

}  // namespace

bool Node::has(const std::string& key) const {
  return j_->is_object() && j_->contains(key) && !(*j_)[key].is_null();
}

std::string Node::key_path(const std::string& key) const { return join(path_, key); }

Node Node::at(const std::string& key) const {
  if (!j_->is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  if (!has(key)) throw ConfigError(key_path(key), "missing required key");
  return Node((*j_)[key], key_path(key));
}

double Node::number(const std::string& key) const {
  const Node n = at(key);
  if (!n.raw().is_number())
    throw ConfigError(n.path(), std::string("expected a number, got ") + type_name(n.raw()));
  const double v = n.raw().get<double>();
  if (!std::isfinite(v)) throw ConfigError(n.path(), "expected a finite number");
  return v;
}

double Node::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

double Node::positive(const std::string& key) const {
  const double v = number(key);
  if (!(v > 0.0)) throw ConfigError(key_path(key), "must be positive");
  return v;
}

double Node::positive(const std::string& key, double fallback) const {
  return has(key) ? positive(key) : fallback;
}

int Node::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const Node n = at(key);
  if (!n.raw().is_number_integer()) throw ConfigError(n.path(), "expected an integer");
  return n.raw().get<int>();
}

bool Node::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Node n = at(key);
  if (!n.raw().is_boolean()) throw ConfigError(n.path(), "expected true or false");
  return n.raw().get<bool>();
}

std::string Node::string(const std::string& key) const {
  const Node n = at(key);
  if (!n.raw().is_string()) throw ConfigError(n.path(), "expected a string");
  return n.raw().get<std::string>();
}

std::string Node::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

rdp::Point Node::point(const std::string& key, int dim) const { return to_point(*this, key, dim); }

std::vector<double> Node::numbers(const std::string& key) const {
  const Node n = at(key);
  if (!n.raw().is_array()) throw ConfigError(n.path(), "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n.raw().size(); ++i) {
    const json& v = n.raw()[i];
    if (!v.is_number() || !std::isfinite(v.get<double>()))
      throw ConfigError(n.path() + "[" + std::to_string(i) + "]", "expected a finite number");
    out.push_back(v.get<double>());
  }
  return out;
}

rdp::Point to_point(const Node& parent, const std::string& key, int dim) {
  const auto v = parent.numbers(key);
  if (int(v.size()) != dim)
    throw ConfigError(parent.key_path(key), "expected " + std::to_string(dim) + " coordinates");
  rdp::Point p{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) p[std::size_t(d)] = v[std::size_t(d)];
  return p;
}

ScenarioConfig parse_config(const json& doc, const std::filesystem::path& source) {
  if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
  const Node root(doc, "");
  ScenarioConfig c;
  c.doc = doc;
  c.source = source;
  c.name = root.string("name");
  if (c.name.empty() || c.name.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError("name", "must be a non-empty token without slashes or spaces");
  c.task = root.string("task");
  bool known = false;
  for (const auto& t : kTasks) known = known || t == c.task;
  if (!known) throw ConfigError("task", "unknown task '" + c.task + "'");
  c.rel_tol = root.positive("rel_tol", 1e-8);
  if (c.rel_tol > 1e-2) throw ConfigError("rel_tol", "must lie in (0, 1e-2]");
  c.output = root.string("output", "");
  if (c.task == "lemma_3_4") return c;  // synthetic, no grid

  c.dim = root.integer("dimension", 0);
  if (!root.has("dimension")) throw ConfigError("dimension", "missing required key");
  if (c.dim != 2 && c.dim != 3) throw ConfigError("dimension", "must be 2 or 3");
  const Node box = root.at("box");
  if (!box.raw().is_array() || int(box.raw().size()) != c.dim)
    throw ConfigError("box", "expected one [lo, hi] pair per axis");
  for (int d = 0; d < c.dim; ++d) {
    const std::string p = "box[" + std::to_string(d) + "]";
    const json& a = box.raw()[std::size_t(d)];
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
      throw ConfigError(p, "expected [lo, hi]");
    const double lo = a[0].get<double>(), hi = a[1].get<double>();
    if (!(hi > lo)) throw ConfigError(p, "needs hi > lo");
    c.box.push_back({lo, hi});
  }
  c.h = root.positive("h");
  if (root.has("refine")) {
    c.refine = root.numbers("refine");
    if (c.refine.empty()) throw ConfigError("refine", "needs at least one factor");
    for (double f : c.refine)
      if (!(f >= 1.0)) throw ConfigError("refine", "factors must be at least 1");
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("<file>", "cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc, file);
}

rdp::NodeSet build_set(const rdp::Grid& grid, const Node& spec) {
  const int dim = grid.dim();
  const std::string type = spec.string("type");
  auto combine = [&](auto op) {
    const Node of = spec.at("of");
    if (!of.raw().is_array() || of.raw().empty())
      throw ConfigError(of.path(), "expected a non-empty array of sets");
    rdp::NodeSet acc = build_set(grid, Node(of.raw()[0], of.path() + "[0]"));
    for (std::size_t i = 1; i < of.raw().size(); ++i)
      acc = op(acc, build_set(grid, Node(of.raw()[i], of.path() + "[" + std::to_string(i) + "]")));
    return acc;
  };
  if (type == "ball")
    return rdp::mask(grid, rdp::Ball{spec.point("center", dim), spec.positive("radius")});
  if (type == "annulus") {
    const double inner = spec.number("inner"), outer = spec.positive("outer");
    if (!(inner >= 0.0 && inner < outer)) throw ConfigError(spec.path(), "needs 0 <= inner < outer");
    return rdp::mask(grid, rdp::Annulus{spec.point("center", dim), inner, outer});
  }
  if (type == "halfspace")
    return rdp::mask(grid, rdp::HalfSpace{spec.point("normal", dim), spec.number("offset", 0.0)});
  if (type == "box") return rdp::mask(grid, rdp::AxisBox{spec.point("lo", dim), spec.point("hi", dim)});
  if (type == "point") {
    const rdp::Point x = spec.point("at", dim);
    if (!grid.contains(x, 1e-9 * grid.spacing())) throw ConfigError(spec.key_path("at"), "outside the grid box");
    return rdp::NodeSet(grid, {grid.nearest_node(x)});
  }
  if (type == "all") return rdp::NodeSet::all(grid);
  if (type == "union") return combine(rdp::set_union);
  if (type == "intersection") return combine(rdp::set_intersection);
  if (type == "difference") return combine(rdp::set_difference);
  throw ConfigError(spec.key_path("type"), "unknown set type '" + type + "'");
}

rdp::Field build_function(const rdp::Grid& grid, const Node& spec) {
  const int dim = grid.dim();
  if (spec.raw().is_number()) return rdp::Field(grid, spec.raw().get<double>());
  const std::string type = spec.string("type");
  auto fold = [&](double init, auto op) {
    const Node of = spec.at("of");
    if (!of.raw().is_array() || of.raw().empty())
      throw ConfigError(of.path(), "expected a non-empty array of functions");
    rdp::Field acc(grid, init);
    for (std::size_t i = 0; i < of.raw().size(); ++i) {
      const rdp::Field f =
          build_function(grid, Node(of.raw()[i], of.path() + "[" + std::to_string(i) + "]"));
      for (std::size_t n = 0; n < acc.size(); ++n) acc.values[n] = op(acc.values[n], f.values[n]);
    }
    return acc;
  };
  if (type == "constant") return rdp::Field(grid, spec.number("value"));
  if (type == "linear") {
    const rdp::Point a = spec.point("gradient", dim);
    const double b = spec.number("offset", 0.0);
    return rdp::Field::from_function(grid, [&](const rdp::Point& x) {
      return b + a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
    });
  }
  if (type == "radial_power") {
    const rdp::Point c = spec.point("center", dim);
    const double p = spec.number("power"), s = spec.number("scale", 1.0);
    if (p < 0.0) throw ConfigError(spec.key_path("power"), "must be nonnegative");
    return rdp::Field::from_function(grid, [&](const rdp::Point& x) {
      return s * std::pow(rdp::distance(x, c), p);
    });
  }
  if (type == "indicator") {
    const rdp::NodeSet set = build_set(grid, spec.at("set"));
    const double v = spec.number("value", 1.0);
    rdp::Field f(grid, 0.0);
    for (auto i : set) f.values[i] = v;
    return f;
  }
  if (type == "positive_part") {
    const rdp::Point n = spec.point("normal", dim);
    const double off = spec.number("offset", 0.0), s = spec.number("scale", 1.0);
    const double p = spec.positive("power", 1.0);
    return rdp::Field::from_function(grid, [&](const rdp::Point& x) {
      const double t = n[0] * x[0] + n[1] * x[1] + n[2] * x[2] - off;
      return t > 0.0 ? s * std::pow(t, p) : 0.0;
    });
  }
  if (type == "sum") return fold(0.0, [](double a, double b) { return a + b; });
  if (type == "product") return fold(1.0, [](double a, double b) { return a * b; });
  throw ConfigError(spec.key_path("type"), "unknown function type '" + type + "'");
}

rdp::EllipticCoefficients build_coefficients(int dim, const Node& spec) {
  const std::string type = spec.string("type");
  if (type == "laplacian") return rdp::EllipticCoefficients::laplacian(dim);
  const double lo = spec.positive("lambda"), hi = spec.positive("Lambda");
  if (hi < lo) throw ConfigError(spec.key_path("Lambda"), "must be at least lambda");
  if (type == "constant") {
    const Node m = spec.at("matrix");
    if (!m.raw().is_array() || int(m.raw().size()) != dim)
      throw ConfigError(m.path(), "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
    rdp::Matrix3 a{};
    for (int i = 0; i < dim; ++i) {
      const json& row = m.raw()[std::size_t(i)];
      if (!row.is_array() || int(row.size()) != dim)
        throw ConfigError(m.path() + "[" + std::to_string(i) + "]", "wrong row length");
      for (int j = 0; j < dim; ++j) {
        if (!row[std::size_t(j)].is_number())
          throw ConfigError(m.path() + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                            "expected a number");
        a[std::size_t(i)][std::size_t(j)] = row[std::size_t(j)].get<double>();
      }
    }
    return rdp::EllipticCoefficients::constant(dim, a, lo, hi);
  }
  if (type == "oscillating") {
    // a_ij = delta_ij (1 + amplitude sin(frequency x_1))
    const double amp = spec.number("amplitude"), freq = spec.number("frequency");
    if (!(std::abs(amp) < 1.0)) throw ConfigError(spec.key_path("amplitude"), "must lie in (-1, 1)");
    return rdp::EllipticCoefficients::variable(
        dim,
        [amp, freq](const rdp::Point& x) {
          const double s = 1.0 + amp * std::sin(freq * x[0]);
          rdp::Matrix3 a{};
          a[0][0] = a[1][1] = a[2][2] = s;
          return a;
        },
        lo, hi, "oscillating");
  }
  throw ConfigError(spec.key_path("type"), "unknown coefficient type '" + type + "'");
}

rdp::Measure build_measure(const rdp::Grid& grid, const Node& spec) {
  const std::string type = spec.string("type");
  if (type == "zero") return rdp::ZeroMeasure{};
  if (type == "obstacle") return rdp::ObstacleMeasure{build_set(grid, spec.at("set"))};
  if (type == "density") {
    rdp::Measure mu;
    try {
      mu = rdp::make_density(build_function(grid, spec.at("function")));
    } catch (const rdp::MeasureError& e) {
      throw ConfigError(spec.key_path("function"), e.what());
    }
    if (spec.has("support"))
      std::get<rdp::DensityMeasure>(mu).support = build_set(grid, spec.at("support"));
    return mu;
  }
  throw ConfigError(spec.key_path("type"), "unknown measure type '" + type + "'");
}

rdp::MassScheme build_mass(const Node& parent) {
  const std::string m = parent.string("mass", "lumped");
  if (m == "lumped") return rdp::MassScheme::lumped;
  if (m == "consistent") return rdp::MassScheme::consistent;
  throw ConfigError(parent.key_path("mass"), "expected lumped or consistent");
}

}  // namespace rdplab
