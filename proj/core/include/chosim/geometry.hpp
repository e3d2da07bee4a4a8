#pragma once

#include <span>
#include <vector>

namespace chosim {

struct Point
{
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point operator+(Point a, Point b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point operator-(Point a, Point b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point operator*(double s, Point p) noexcept { return {s * p.x, s * p.y}; }
    friend constexpr bool operator==(Point, Point) = default;
};

double distance(Point a, Point b) noexcept;
double norm(Point p) noexcept;

/// Axis-aligned rectangle; used for building footprints.
struct Rect
{
    Point min;
    Point max;

    bool contains(Point p) const noexcept
    {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    double width() const noexcept { return max.x - min.x; }
    double height() const noexcept { return max.y - min.y; }
    bool degenerate() const noexcept { return !(width() > 0.0 && height() > 0.0); }
};

/// True when the closed segment [a, b] touches the interior or boundary of r.
bool segment_intersects(Point a, Point b, const Rect& r) noexcept;

/// Convex polygon, vertices in counter-clockwise order.
class ConvexPolygon
{
  public:
    ConvexPolygon() = default;
    /// Accepts either winding; throws ConfigError when not strictly convex.
    explicit ConvexPolygon(std::vector<Point> vertices);

    static ConvexPolygon from_rect(const Rect& r);

    std::span<const Point> vertices() const noexcept { return vertices_; }
    bool contains(Point p, double tolerance = 1e-9) const noexcept;
    double area() const noexcept;
    Rect bounding_box() const noexcept;

  private:
    std::vector<Point> vertices_;
};

/// Open polyline with at least two vertices.
struct Polyline
{
    std::vector<Point> points;
};

double distance_to_segment(Point p, Point a, Point b) noexcept;

} // namespace chosim
