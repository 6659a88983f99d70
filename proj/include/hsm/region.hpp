#pragma once

#include "hsm/rational.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace hsm {

// A point (1/p, 1/q) of the unit square.
struct RatPoint {
  Rational ip;
  Rational iq;
  bool operator==(const RatPoint&) const = default;
};

// Throws DomainError unless both coordinates lie in [0, 1].
RatPoint make_point(Rational ip, Rational iq);

enum class Closure { Included, Excluded, Unresolved };
enum class Mode { Strong, RestrictedWeak };

struct ClosureFlags {
  std::vector<Closure> vertex;  // one per vertex
  std::vector<Closure> edge;    // relative interior of edge i -> i+1
  bool operator==(const ClosureFlags&) const = default;
};

// Convex polygon with counterclockwise exact vertices and closure flags for
// strong-type and restricted-weak-type bounds.
struct Region {
  std::string label;
  int n = 0;
  int m = 0;
  bool in_theorem_scope = true;
  std::vector<RatPoint> vertices;
  std::vector<std::string> names;
  ClosureFlags strong;
  ClosureFlags rwt;

  const ClosureFlags& flags(Mode mode) const { return mode == Mode::Strong ? strong : rwt; }
  bool operator==(const Region&) const = default;
};

// The quadrilateral Q1 Q4 Q3 Q2 for the local maximal operator. Degenerate
// corners (n = 1) are merged.
Region maximal_region(int n, int m);
// The region for the fixed-time averages: triangle, triangle without P3, or
// the five-point hull depending on m relative to 2n.
Region averaging_region(int n, int m);

enum class Location {
  Interior,
  EdgeIncluded,
  EdgeExcluded,
  EdgeUnresolved,
  VertexIncluded,
  VertexExcluded,
  VertexUnresolved,
  Outside
};

std::string_view to_string(Location loc);
std::string_view to_string(Closure c);

Location contains(const Region& region, const RatPoint& pt, Mode mode = Mode::Strong);

// (1 - th) e0 + th e1 with th = a0 / (a0 + a1).
RatPoint bourgain_vertex(const RatPoint& e0, const Rational& a0, const RatPoint& e1,
                         const Rational& a1);

// Twice the signed area of (a, b, c); positive for a left turn.
Rational cross(const RatPoint& a, const RatPoint& b, const RatPoint& c);
// Counterclockwise with no right turns; straight angles are allowed because
// Q3 lies on the segment Q4 Q2 when m = 2n - 1.
bool is_convex(const Region& region);
// Counterclockwise hull without collinear points, starting at the lowest
// leftmost point.
std::vector<RatPoint> convex_hull(std::vector<RatPoint> points);

enum class ExportFormat { Csv, Svg };

std::string export_region(const Region& region, ExportFormat format);
Region parse_region_csv(std::string_view text);

}  // namespace hsm
