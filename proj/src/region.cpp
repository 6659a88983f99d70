#include "hsm/region.hpp"

#include "hsm/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace hsm {

namespace {

Closure merge(Closure a, Closure b) { return a == b ? a : Closure::Unresolved; }

// Drops consecutive repeated vertices (cyclically), joining their names and
// flags.
void merge_repeated_vertices(Region& r) {
  bool changed = true;
  while (changed && r.vertices.size() > 1) {
    changed = false;
    const std::size_t k = r.vertices.size();
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = (i + 1) % k;
      if (r.vertices[i] != r.vertices[j]) continue;
      r.names[i] += "=" + r.names[j];
      for (ClosureFlags* f : {&r.strong, &r.rwt}) {
        f->vertex[i] = merge(f->vertex[i], f->vertex[j]);
        f->edge.erase(f->edge.begin() + static_cast<std::ptrdiff_t>(i));
        f->vertex.erase(f->vertex.begin() + static_cast<std::ptrdiff_t>(j));
      }
      r.vertices.erase(r.vertices.begin() + static_cast<std::ptrdiff_t>(j));
      r.names.erase(r.names.begin() + static_cast<std::ptrdiff_t>(j));
      changed = true;
      break;
    }
  }
}

ClosureFlags uniform_flags(std::size_t k, Closure c) {
  return {std::vector<Closure>(k, c), std::vector<Closure>(k, c)};
}

bool on_segment(const RatPoint& a, const RatPoint& b, const RatPoint& p) {
  if (cross(a, b, p).numerator() != 0) return false;
  const Rational dot = (p.ip - a.ip) * (b.ip - a.ip) + (p.iq - a.iq) * (b.iq - a.iq);
  const Rational len = (b.ip - a.ip) * (b.ip - a.ip) + (b.iq - a.iq) * (b.iq - a.iq);
  return dot > 0 && dot < len;
}

Location vertex_location(Closure c) {
  switch (c) {
    case Closure::Included: return Location::VertexIncluded;
    case Closure::Excluded: return Location::VertexExcluded;
    case Closure::Unresolved: return Location::VertexUnresolved;
  }
  return Location::VertexUnresolved;
}

Location edge_location(Closure c) {
  switch (c) {
    case Closure::Included: return Location::EdgeIncluded;
    case Closure::Excluded: return Location::EdgeExcluded;
    case Closure::Unresolved: return Location::EdgeUnresolved;
  }
  return Location::EdgeUnresolved;
}

Closure parse_closure(std::string_view s) {
  if (s == "included") return Closure::Included;
  if (s == "excluded") return Closure::Excluded;
  if (s == "unresolved") return Closure::Unresolved;
  throw DomainError("unknown closure flag '" + std::string(s) + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

RatPoint make_point(Rational ip, Rational iq) {
  if (ip < 0 || ip > 1 || iq < 0 || iq > 1) {
    throw DomainError("point (" + to_string(ip) + ", " + to_string(iq) + ") leaves the unit square");
  }
  return {ip, iq};
}

Rational cross(const RatPoint& a, const RatPoint& b, const RatPoint& c) {
  return (b.ip - a.ip) * (c.iq - a.iq) - (b.iq - a.iq) * (c.ip - a.ip);
}

bool is_convex(const Region& region) {
  const std::size_t k = region.vertices.size();
  if (k < 3) return false;
  bool turns = false;
  for (std::size_t i = 0; i < k; ++i) {
    const Rational c = cross(region.vertices[i], region.vertices[(i + 1) % k], region.vertices[(i + 2) % k]);
    if (c < 0) return false;
    if (c > 0) turns = true;
  }
  return turns;
}

std::vector<RatPoint> convex_hull(std::vector<RatPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const RatPoint& a, const RatPoint& b) {
    return a.ip < b.ip || (a.ip == b.ip && a.iq < b.iq);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<RatPoint> hull;
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t base = hull.size();
    for (const RatPoint& p : pts) {
      while (hull.size() >= base + 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0) {
        hull.pop_back();
      }
      hull.push_back(p);
    }
    hull.pop_back();
    std::reverse(pts.begin(), pts.end());
  }
  return hull;
}

Region maximal_region(int n, int m) {
  if (n < 1 || m < 1) throw DomainError("maximal_region needs n >= 1 and m >= 1");
  const std::int64_t d = 2 * n + m;
  const Rational q2(d - m - 1, d - m);
  const Rational den = Rational(d * d + (d + 1) * m + 1);
  Region r;
  r.label = "maximal";
  r.n = n;
  r.m = m;
  r.in_theorem_scope = n >= 2;
  r.vertices = {make_point(0, 0),
                make_point(Rational(d * (d - 1)) / den, Rational((m + 1) * (d - 1)) / den),
                make_point(Rational(d - 1, d + m), Rational(m + 1, d + m)),
                make_point(q2, q2)};
  r.names = {"Q1", "Q4", "Q3", "Q2"};
  // Strong type holds on the interior, on the open edges (Q2,Q3), (Q3,Q4)
  // and on the half-open edges [Q1,Q2), [Q1,Q4). It fails at Q2 in the
  // Heisenberg case; Q3 and Q4 are restricted weak type endpoints.
  r.strong = uniform_flags(4, Closure::Included);
  r.strong.vertex = {Closure::Included, Closure::Unresolved, Closure::Unresolved,
                     m == 1 ? Closure::Excluded : Closure::Unresolved};
  r.rwt = uniform_flags(4, Closure::Included);
  if (!r.in_theorem_scope) {
    r.strong = uniform_flags(4, Closure::Unresolved);
    r.rwt = uniform_flags(4, Closure::Unresolved);
    r.strong.vertex[0] = r.rwt.vertex[0] = Closure::Included;
  }
  merge_repeated_vertices(r);
  return r;
}

Region averaging_region(int n, int m) {
  if (n < 1 || m < 1) throw DomainError("averaging_region needs n >= 1 and m >= 1");
  if (m > 2 * n - 1) throw DomainError("averaging_region needs m <= 2n - 1");
  Region r;
  r.label = "averaging";
  r.n = n;
  r.m = m;
  if (m < 2 * n - 1) {
    const Rational den(2 * n + 2 * m + 1);
    r.vertices = {make_point(0, 0), make_point(Rational(2 * n + m) / den, Rational(m + 1) / den),
                  make_point(1, 1)};
    r.names = {"P1", "P3", "P2"};
    r.strong = uniform_flags(3, Closure::Included);
    if (m == 2 * n - 2) r.strong.vertex[1] = Closure::Unresolved;
    r.rwt = r.strong;
    return r;
  }
  const std::int64_t mm = m;
  const std::vector<RatPoint> corners = {
      make_point(0, 0),
      make_point(1, 1),
      make_point(Rational(4 * mm * mm + 3 * mm + 1, 6 * mm * mm + 5 * mm + 1), Rational(mm + 1, 3 * mm + 1)),
      make_point(Rational(6 * mm + 1, 9 * mm + 3), Rational(3 * mm + 2, 9 * mm + 3)),
      make_point(Rational(2 * mm, 3 * mm + 1), Rational(2 * mm * mm + 2 * mm, 6 * mm * mm + 5 * mm + 1))};
  const std::vector<std::string> corner_names = {"V1", "V2", "V3", "V4", "V5"};
  r.vertices = convex_hull(corners);
  for (const RatPoint& v : r.vertices) {
    const auto it = std::find(corners.begin(), corners.end(), v);
    r.names.push_back(corner_names[static_cast<std::size_t>(it - corners.begin())]);
  }
  r.strong = uniform_flags(r.vertices.size(), Closure::Included);
  r.rwt = r.strong;
  return r;
}

std::string_view to_string(Location loc) {
  switch (loc) {
    case Location::Interior: return "interior";
    case Location::EdgeIncluded: return "edge-included";
    case Location::EdgeExcluded: return "edge-excluded";
    case Location::EdgeUnresolved: return "edge-unresolved";
    case Location::VertexIncluded: return "vertex-included";
    case Location::VertexExcluded: return "vertex-excluded";
    case Location::VertexUnresolved: return "vertex-unresolved";
    case Location::Outside: return "outside";
  }
  return "outside";
}

std::string_view to_string(Closure c) {
  switch (c) {
    case Closure::Included: return "included";
    case Closure::Excluded: return "excluded";
    case Closure::Unresolved: return "unresolved";
  }
  return "unresolved";
}

Location contains(const Region& region, const RatPoint& pt, Mode mode) {
  const ClosureFlags& flags = region.flags(mode);
  const std::size_t k = region.vertices.size();
  for (std::size_t i = 0; i < k; ++i) {
    if (region.vertices[i] == pt) return vertex_location(flags.vertex[i]);
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (on_segment(region.vertices[i], region.vertices[(i + 1) % k], pt)) {
      return edge_location(flags.edge[i]);
    }
  }
  if (k < 3) return Location::Outside;
  for (std::size_t i = 0; i < k; ++i) {
    if (cross(region.vertices[i], region.vertices[(i + 1) % k], pt) <= 0) return Location::Outside;
  }
  return Location::Interior;
}

RatPoint bourgain_vertex(const RatPoint& e0, const Rational& a0, const RatPoint& e1,
                         const Rational& a1) {
  if ((a0 + a1).numerator() == 0) throw DomainError("bourgain_vertex needs a0 + a1 != 0");
  if (a0 <= 0 || a1 <= 0) throw DomainError("bourgain_vertex needs positive exponents a0, a1");
  const Rational th = a0 / (a0 + a1);
  return {(1 - th) * e0.ip + th * e1.ip, (1 - th) * e0.iq + th * e1.iq};
}

std::string export_region(const Region& region, ExportFormat format) {
  std::ostringstream out;
  const std::size_t k = region.vertices.size();
  if (format == ExportFormat::Csv) {
    out << "# schema=1\n";
    out << "# region=" << region.label << " n=" << region.n << " m=" << region.m
        << " scope=" << (region.in_theorem_scope ? "theorem" : "outside-theorem") << "\n";
    out << "kind,name,ip,iq,strong,rwt\n";
    for (std::size_t i = 0; i < k; ++i) {
      out << "vertex," << region.names[i] << "," << to_string(region.vertices[i].ip) << ","
          << to_string(region.vertices[i].iq) << "," << to_string(region.strong.vertex[i]) << ","
          << to_string(region.rwt.vertex[i]) << "\n";
    }
    for (std::size_t i = 0; i < k; ++i) {
      out << "edge," << region.names[i] << "-" << region.names[(i + 1) % k] << ",,,"
          << to_string(region.strong.edge[i]) << "," << to_string(region.rwt.edge[i]) << "\n";
    }
    return out.str();
  }
  // Unit square drawn at 360 px with a 50 px margin; iq grows upward.
  const double size = 360.0, margin = 50.0;
  auto px = [&](const Rational& r) { return margin + size * to_double(r); };
  auto py = [&](const Rational& r) { return margin + size * (1.0 - to_double(r)); };
  char buf[160];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"460\" height=\"460\" viewBox=\"0 0 460 460\">\n";
  out << "<title>" << region.label << " region n=" << region.n << " m=" << region.m << "</title>\n";
  out << "<rect x=\"50\" y=\"50\" width=\"360\" height=\"360\" fill=\"none\" stroke=\"#999\"/>\n";
  out << "<line x1=\"50\" y1=\"410\" x2=\"430\" y2=\"410\" stroke=\"black\"/>\n";
  out << "<line x1=\"50\" y1=\"410\" x2=\"50\" y2=\"30\" stroke=\"black\"/>\n";
  out << "<text x=\"425\" y=\"430\" font-size=\"14\">1/p</text>\n";
  out << "<text x=\"15\" y=\"40\" font-size=\"14\">1/q</text>\n";
  out << "<polygon points=\"";
  for (std::size_t i = 0; i < k; ++i) {
    std::snprintf(buf, sizeof buf, "%s%.4f,%.4f", i ? " " : "", px(region.vertices[i].ip),
                  py(region.vertices[i].iq));
    out << buf;
  }
  out << "\" fill=\"#cde\" stroke=\"#246\" stroke-width=\"1.5\"/>\n";
  for (std::size_t i = 0; i < k; ++i) {
    const bool filled = region.strong.vertex[i] == Closure::Included;
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.4f\" cy=\"%.4f\" r=\"4\" fill=\"%s\" stroke=\"#246\"/>\n",
                  px(region.vertices[i].ip), py(region.vertices[i].iq), filled ? "#246" : "white");
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.4f\" y=\"%.4f\" font-size=\"12\">", px(region.vertices[i].ip) + 6,
                  py(region.vertices[i].iq) - 6);
    out << buf << region.names[i] << " (" << to_string(region.vertices[i].ip) << ", "
        << to_string(region.vertices[i].iq) << ")</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

Region parse_region_csv(std::string_view text) {
  Region r;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# region=", 0) == 0) {
      std::istringstream meta(line.substr(2));
      std::string token;
      while (meta >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
        if (key == "region") r.label = value;
        if (key == "n") r.n = std::stoi(value);
        if (key == "m") r.m = std::stoi(value);
        if (key == "scope") r.in_theorem_scope = value == "theorem";
      }
      continue;
    }
    if (line[0] == '#') continue;
    if (!header_seen) {
      if (line != "kind,name,ip,iq,strong,rwt") throw DomainError("unexpected region CSV header");
      header_seen = true;
      continue;
    }
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 6) throw DomainError("region CSV row needs 6 fields: " + line);
    if (f[0] == "vertex") {
      r.names.push_back(f[1]);
      r.vertices.push_back(make_point(parse_rational(f[2]), parse_rational(f[3])));
      r.strong.vertex.push_back(parse_closure(f[4]));
      r.rwt.vertex.push_back(parse_closure(f[5]));
    } else if (f[0] == "edge") {
      r.strong.edge.push_back(parse_closure(f[4]));
      r.rwt.edge.push_back(parse_closure(f[5]));
    } else {
      throw DomainError("unknown region CSV row kind '" + f[0] + "'");
    }
  }
  if (r.strong.edge.size() != r.vertices.size()) throw DomainError("region CSV edge count mismatch");
  return r;
}

}  // namespace hsm
