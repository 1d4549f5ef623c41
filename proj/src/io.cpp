#include "packing/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace packing {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kSolutionSchema = "packing-solution/1";
constexpr const char* kModelSchema = "packing-model/1";

// 17 significant digits round-trip every finite double bit-exactly.
std::string dtos(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double stod_exact(const std::string& s) {
  const char* p = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(p, &end);
  if (end == p || *end != '\0') throw IoError("bad number: '" + s + "'");
  return v;
}

Json doubles_to_json(const std::vector<double>& v) {
  Json out = Json::array();
  for (double d : v) out.push_back(dtos(d));
  return out;
}

std::vector<double> doubles_from_json(const Json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(stod_exact(e.get<std::string>()));
  return out;
}

const char* symmetry_name(SymmetryMode m) {
  switch (m) {
    case SymmetryMode::none: return "none";
    case SymmetryMode::centroid: return "centroid";
    case SymmetryMode::sort_x: return "sort_x";
    case SymmetryMode::generic_line: return "generic_line";
  }
  return "?";
}

SymmetryMode symmetry_from_name(const std::string& s) {
  for (SymmetryMode m : {SymmetryMode::none, SymmetryMode::centroid, SymmetryMode::sort_x,
                         SymmetryMode::generic_line})
    if (s == symmetry_name(m)) return m;
  throw IoError("unknown symmetry mode: " + s);
}

Json instance_to_json(const Instance& inst) {
  Json j;
  j["family"] = family_name(inst.family);
  j["l"] = inst.l;
  j["m"] = inst.m;
  j["n"] = inst.n;
  j["variant"] = variant_name(inst.variant);
  j["epsilon"] = dtos(inst.epsilon);
  if (inst.family == Family::circle_ellipse) {
    Json e;
    e["strengthening"] = inst.ellipse.strengthening;
    e["symmetry"] = symmetry_name(inst.ellipse.symmetry);
    e["line_alpha"] = dtos(inst.ellipse.line_alpha);
    e["line_beta"] = dtos(inst.ellipse.line_beta);
    j["ellipse"] = e;
  }
  return j;
}

Instance instance_from_json(const Json& j) {
  Instance inst;
  const auto fam = family_from_name(j.at("family").get<std::string>());
  if (!fam) throw IoError("unknown family: " + j.at("family").get<std::string>());
  inst.family = *fam;
  inst.l = j.at("l").get<int>();
  inst.m = j.at("m").get<int>();
  inst.n = j.at("n").get<int>();
  const auto var = variant_from_name(j.at("variant").get<std::string>());
  if (!var) throw IoError("unknown variant: " + j.at("variant").get<std::string>());
  inst.variant = *var;
  inst.epsilon = stod_exact(j.at("epsilon").get<std::string>());
  if (j.contains("ellipse")) {
    const Json& e = j.at("ellipse");
    inst.ellipse.strengthening = e.at("strengthening").get<bool>();
    inst.ellipse.symmetry = symmetry_from_name(e.at("symmetry").get<std::string>());
    inst.ellipse.line_alpha = stod_exact(e.at("line_alpha").get<std::string>());
    inst.ellipse.line_beta = stod_exact(e.at("line_beta").get<std::string>());
  }
  return inst;
}

Json expr_to_json(const Expr& e) {
  Json j;
  switch (e->op) {
    case ExprOp::constant:
      j["op"] = "const";
      j["value"] = e->value;  // shortest round-trip decimal via the serializer
      break;
    case ExprOp::variable:
      j["op"] = "var";
      j["index"] = e->var;
      break;
    case ExprOp::add:
    case ExprOp::sub:
    case ExprOp::mul:
      j["op"] = e->op == ExprOp::add ? "add" : e->op == ExprOp::sub ? "sub" : "mul";
      j["args"] = Json::array({expr_to_json(e->a), expr_to_json(e->b)});
      break;
    case ExprOp::neg:
      j["op"] = "neg";
      j["args"] = Json::array({expr_to_json(e->a)});
      break;
    case ExprOp::powi:
      j["op"] = "pow";
      j["exponent"] = e->exponent;
      j["args"] = Json::array({expr_to_json(e->a)});
      break;
    case ExprOp::sin:
      j["op"] = "sin";
      j["args"] = Json::array({expr_to_json(e->a)});
      break;
    case ExprOp::cos:
      j["op"] = "cos";
      j["args"] = Json::array({expr_to_json(e->a)});
      break;
  }
  return j;
}

Expr expr_from_json(const Json& j) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "const") return constant(j.at("value").get<double>());
  if (op == "var") return variable(j.at("index").get<int>());
  const Json& args = j.at("args");
  if (op == "add") return expr_from_json(args.at(0)) + expr_from_json(args.at(1));
  if (op == "sub") return expr_from_json(args.at(0)) - expr_from_json(args.at(1));
  if (op == "mul") return expr_from_json(args.at(0)) * expr_from_json(args.at(1));
  if (op == "neg") return -expr_from_json(args.at(0));
  if (op == "pow") return powi(expr_from_json(args.at(0)), j.at("exponent").get<int>());
  if (op == "sin") return sin_e(expr_from_json(args.at(0)));
  if (op == "cos") return cos_e(expr_from_json(args.at(0)));
  throw IoError("unknown expression operator: " + op);
}

Json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

double bound_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw IoError("bad bound: " + s);
  }
  return j.get<double>();
}

std::optional<Tag> tag_from_name(const std::string& s) {
  for (Tag t : {Tag::containment, Tag::separation, Tag::farkas_sum, Tag::distance, Tag::symmetry,
                Tag::area, Tag::strengthening, Tag::halfspace})
    if (s == tag_name(t)) return t;
  return std::nullopt;
}

// ---- SVG helpers -----------------------------------------------------------

struct SvgCanvas {
  double minx, miny, maxx, maxy, scale, pad;
  std::ostringstream os;

  SvgCanvas(double x0, double y0, double x1, double y1) {
    const double margin = 0.05 * std::max(x1 - x0, y1 - y0);
    minx = x0 - margin;
    miny = y0 - margin;
    maxx = x1 + margin;
    maxy = y1 + margin;
    scale = 640.0 / std::max(maxx - minx, maxy - miny);
    pad = 0;
  }
  double X(double x) const { return (x - minx) * scale; }
  double Y(double y) const { return (maxy - y) * scale; }  // flip: SVG y grows downward
  double W() const { return (maxx - minx) * scale; }
  double H() const { return (maxy - miny) * scale; }

  void header() {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.2f\" height=\"%.2f\" "
                  "viewBox=\"0 0 %.2f %.2f\">\n",
                  W(), H(), W(), H());
    os << buf;
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  void circle(double cx, double cy, double r, const char* style) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.4f\" cy=\"%.4f\" r=\"%.4f\" %s/>\n", X(cx),
                  Y(cy), r * scale, style);
    os << buf;
  }
  void ellipse(double rx, double ry, const char* style) {
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "<ellipse cx=\"%.4f\" cy=\"%.4f\" rx=\"%.4f\" ry=\"%.4f\" %s/>\n", X(0), Y(0),
                  rx * scale, ry * scale, style);
    os << buf;
  }
  void polygon(const std::vector<Vec2>& pts, const char* style) {
    os << "<polygon points=\"";
    char buf[48];
    for (size_t k = 0; k < pts.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.4f,%.4f", k ? " " : "", X(pts[k].x), Y(pts[k].y));
      os << buf;
    }
    os << "\" " << style << "/>\n";
  }
  void rect(double x0, double y0, double x1, double y1, const char* style) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.4f\" y=\"%.4f\" width=\"%.4f\" height=\"%.4f\" %s/>\n", X(x0),
                  Y(y1), (x1 - x0) * scale, (y1 - y0) * scale, style);
    os << buf;
  }
  void label(double x, double y, int index, double size_world) {
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.4f\" y=\"%.4f\" font-size=\"%.2f\" font-family=\"sans-serif\" "
                  "text-anchor=\"middle\" dominant-baseline=\"central\">%d</text>\n",
                  X(x), Y(y), size_world * scale, index);
    os << buf;
  }
  std::string finish() {
    os << "</svg>\n";
    return os.str();
  }
};

constexpr const char* kContainerStyle = "fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"";
constexpr const char* kShapeStyle =
    "fill=\"#9ecae1\" fill-opacity=\"0.75\" stroke=\"#08519c\" stroke-width=\"1\"";

}  // namespace

std::string write_solution(const SolutionDocument& doc) {
  Json j;
  j["schema"] = kSolutionSchema;
  j["instance"] = instance_to_json(doc.instance);
  j["objective"] = dtos(doc.solution.objective);
  j["values"] = doubles_to_json(doc.solution.values);
  if (!doc.farkas.empty() || !doc.slemma.empty()) {
    Json certs;
    if (!doc.farkas.empty()) {
      Json arr = Json::array();
      for (const FarkasCertificate& c : doc.farkas) {
        Json e;
        e["i"] = c.i;
        e["j"] = c.j;
        e["lambdas"] = doubles_to_json(c.lambdas);
        e["axis"] = doubles_to_json(c.axis);
        e["offset_gap"] = dtos(c.offset_gap);
        arr.push_back(e);
      }
      certs["farkas"] = arr;
    }
    if (!doc.slemma.empty()) {
      Json arr = Json::array();
      for (const SLemmaCertificate& c : doc.slemma) {
        Json e;
        e["circle"] = c.circle;
        e["t"] = dtos(c.t);
        e["minors"] = doubles_to_json({c.minors.begin(), c.minors.end()});
        arr.push_back(e);
      }
      certs["slemma"] = arr;
    }
    j["certificates"] = certs;
  }
  Json meta;
  meta["instance_id"] = doc.solution.instance_id;
  meta["seed"] = doc.solution.meta.seed;
  meta["restarts_used"] = doc.solution.meta.restarts_used;
  meta["polished"] = doc.solution.meta.polished;
  meta["wall_time"] = dtos(doc.solution.meta.wall_time);
  j["meta"] = meta;
  return j.dump(2) + "\n";
}

SolutionDocument read_solution(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("solution parse error: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != kSolutionSchema)
      throw IoError("unsupported solution schema: " + j.at("schema").get<std::string>());
    SolutionDocument doc;
    doc.instance = instance_from_json(j.at("instance"));
    doc.solution.objective = stod_exact(j.at("objective").get<std::string>());
    doc.solution.values = doubles_from_json(j.at("values"));
    if (j.contains("certificates")) {
      const Json& certs = j.at("certificates");
      if (certs.contains("farkas"))
        for (const Json& e : certs.at("farkas")) {
          FarkasCertificate c;
          c.i = e.at("i").get<int>();
          c.j = e.at("j").get<int>();
          c.lambdas = doubles_from_json(e.at("lambdas"));
          c.axis = doubles_from_json(e.at("axis"));
          c.offset_gap = stod_exact(e.at("offset_gap").get<std::string>());
          doc.farkas.push_back(std::move(c));
        }
      if (certs.contains("slemma"))
        for (const Json& e : certs.at("slemma")) {
          SLemmaCertificate c;
          c.circle = e.at("circle").get<int>();
          c.t = stod_exact(e.at("t").get<std::string>());
          const auto m = doubles_from_json(e.at("minors"));
          if (m.size() != c.minors.size()) throw IoError("bad minors length");
          std::copy(m.begin(), m.end(), c.minors.begin());
          doc.slemma.push_back(std::move(c));
        }
    }
    const Json& meta = j.at("meta");
    doc.solution.instance_id = meta.at("instance_id").get<std::string>();
    doc.solution.meta.seed = meta.at("seed").get<std::uint64_t>();
    doc.solution.meta.restarts_used = meta.at("restarts_used").get<int>();
    doc.solution.meta.polished = meta.at("polished").get<bool>();
    doc.solution.meta.wall_time = stod_exact(meta.at("wall_time").get<std::string>());
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed solution file: ") + e.what());
  }
}

std::string export_model(const Instance& instance) {
  const ConstraintSystem sys = build_system(instance);
  Json j;
  j["schema"] = kModelSchema;
  j["instance"] = instance_to_json(instance);
  j["maximize"] = sys.maximize;
  Json vars = Json::array();
  for (int i = 0; i < sys.dim(); ++i) {
    Json v;
    v["name"] = sys.var_names[i];
    v["lb"] = bound_to_json(sys.lb[i]);
    v["ub"] = bound_to_json(sys.ub[i]);
    vars.push_back(v);
  }
  j["variables"] = vars;
  j["objective"] = expr_to_json(sys.objective_expr);
  Json rows = Json::array();
  for (const ResidualRow& r : sys.rows) {
    Json e;
    e["tag"] = tag_name(r.tag);
    e["equality"] = r.equality;
    e["expr"] = expr_to_json(r.expr);
    rows.push_back(e);
  }
  j["constraints"] = rows;
  return j.dump(2) + "\n";
}

ExportedModel read_model(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("model parse error: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != kModelSchema)
      throw IoError("unsupported model schema: " + j.at("schema").get<std::string>());
    ExportedModel m;
    m.instance = instance_from_json(j.at("instance"));
    m.maximize = j.at("maximize").get<bool>();
    for (const Json& v : j.at("variables")) {
      m.var_names.push_back(v.at("name").get<std::string>());
      m.lb.push_back(bound_from_json(v.at("lb")));
      m.ub.push_back(bound_from_json(v.at("ub")));
    }
    m.objective = expr_from_json(j.at("objective"));
    for (const Json& e : j.at("constraints")) {
      ExportedModel::Row row;
      row.tag = e.at("tag").get<std::string>();
      if (!tag_from_name(row.tag)) throw IoError("unknown constraint tag: " + row.tag);
      row.equality = e.at("equality").get<bool>();
      row.expr = expr_from_json(e.at("expr"));
      m.rows.push_back(std::move(row));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed model file: ") + e.what());
  }
}

std::string render_svg(const Instance& instance, const Solution& sol) {
  const Layout lay = make_layout(instance);
  if (static_cast<int>(sol.values.size()) != lay.size())
    throw IoError("solution size does not match instance layout");
  const std::vector<double>& x = sol.values;
  const int n = instance.n;

  switch (instance.family) {
    case Family::circle_square:
    case Family::circle_rect: {
      const double alpha = lay.container_size == 1 ? x[0] : 1.0;
      SvgCanvas c(0, 0, alpha, 2 - alpha);
      c.header();
      c.rect(0, 0, alpha, 2 - alpha, kContainerStyle);
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        c.circle(x[off], x[off + 1], x[off + 2], kShapeStyle);
      }
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        c.label(x[off], x[off + 1], i, std::min(0.8 * x[off + 2], 0.05));
      }
      return c.finish();
    }
    case Family::circle_ellipse: {
      const double a = x[0], b = x[1];
      SvgCanvas c(-a, -b, a, b);
      c.header();
      c.ellipse(a, b, kContainerStyle);
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        c.circle(x[off], x[off + 1], 1.0, kShapeStyle);
      }
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        c.label(x[off], x[off + 1], i, 0.5);
      }
      return c.finish();
    }
    case Family::polygon: {
      const RegularPolygonSpec sl = polygon_constants(instance.l);
      const RegularPolygonSpec sm = polygon_constants(instance.m);
      const double R = x[0];
      std::vector<Vec2> outer;
      for (int k = 0; k < instance.l; ++k)
        outer.push_back(R * polygon_vertex(Pose2{}, sl, k));
      SvgCanvas c(-R, -R, R, R);
      c.header();
      c.polygon(outer, kContainerStyle);
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        const Pose2 p{x[off], x[off + 1], x[off + 2]};
        std::vector<Vec2> pts;
        for (int k = 0; k < instance.m; ++k) pts.push_back(polygon_vertex(p, sm, k));
        c.polygon(pts, kShapeStyle);
      }
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        c.label(x[off], x[off + 1], i, 0.4);
      }
      return c.finish();
    }
    case Family::platonic:
      throw IoError("3D instances render to OBJ, not SVG");
  }
  throw IoError("unsupported family");
}

std::string render_obj(const Instance& instance, const Solution& sol) {
  if (instance.family != Family::platonic) throw IoError("OBJ rendering is 3D only");
  const Layout lay = make_layout(instance);
  if (static_cast<int>(sol.values.size()) != lay.size())
    throw IoError("solution size does not match instance layout");
  const std::vector<double>& x = sol.values;
  const PlatonicSpec& sl = platonic_spec(platonic_from_index(instance.l));
  const PlatonicSpec& sm = platonic_spec(platonic_from_index(instance.m));
  const double R = x[0];

  std::ostringstream os;
  char buf[96];
  int base = 0;
  auto emit_vertex = [&](const Vec3& v) {
    std::snprintf(buf, sizeof buf, "v %.12f %.12f %.12f\n", v.x, v.y, v.z);
    os << buf;
  };

  os << "o container\n";
  for (const Vec3& v : sl.vertices) emit_vertex(R * v);
  for (const auto& e : sl.edges) os << "l " << base + e[0] + 1 << ' ' << base + e[1] + 1 << '\n';
  base += static_cast<int>(sl.vertices.size());

  for (int i = 0; i < instance.n; ++i) {
    const int off = lay.element_offset(i);
    const Pose3 p{x[off], x[off + 1], x[off + 2], x[off + 3], x[off + 4], x[off + 5]};
    os << "o body_" << i << '\n';
    for (size_t j = 0; j < sm.vertices.size(); ++j)
      emit_vertex(solid_vertex(p, sm, static_cast<int>(j)));
    for (const auto& face : sm.faces)
      for (size_t k = 1; k + 1 < face.size(); ++k)
        os << "f " << base + face[0] + 1 << ' ' << base + face[k] + 1 << ' '
           << base + face[k + 1] + 1 << '\n';
    base += static_cast<int>(sm.vertices.size());
  }
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace packing
