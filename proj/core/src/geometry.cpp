#include "chosim/geometry.hpp"

#include "chosim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chosim {

namespace {

double cross(Point o, Point a, Point b) noexcept
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

} // namespace

double distance(Point a, Point b) noexcept
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

double norm(Point p) noexcept
{
    return std::hypot(p.x, p.y);
}

bool segment_intersects(Point a, Point b, const Rect& r) noexcept
{
    // Liang-Barsky clipping of the parametric segment a + t (b - a), t in [0, 1].
    double t0 = 0.0;
    double t1 = 1.0;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - r.min.x, r.max.x - a.x, a.y - r.min.y, r.max.y - a.y};
    for (int i = 0; i < 4; ++i)
    {
        if (p[i] == 0.0)
        {
            if (q[i] < 0.0)
            {
                return false;
            }
            continue;
        }
        const double t = q[i] / p[i];
        if (p[i] < 0.0)
        {
            t0 = std::max(t0, t);
        }
        else
        {
            t1 = std::min(t1, t);
        }
        if (t0 > t1)
        {
            return false;
        }
    }
    return true;
}

ConvexPolygon::ConvexPolygon(std::vector<Point> vertices)
    : vertices_(std::move(vertices))
{
    const auto n = vertices_.size();
    if (n < 3)
    {
        throw ConfigError("polygon needs at least 3 vertices");
    }
    double signed_area = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const Point& p = vertices_[i];
        const Point& q = vertices_[(i + 1) % n];
        signed_area += p.x * q.y - q.x * p.y;
    }
    if (std::abs(signed_area) < 1e-9)
    {
        throw ConfigError("polygon is degenerate (zero area)");
    }
    if (signed_area < 0.0)
    {
        std::reverse(vertices_.begin(), vertices_.end());
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        if (cross(vertices_[i], vertices_[(i + 1) % n], vertices_[(i + 2) % n]) <= 0.0)
        {
            throw ConfigError("polygon is not strictly convex");
        }
    }
}

ConvexPolygon ConvexPolygon::from_rect(const Rect& r)
{
    return ConvexPolygon({r.min, {r.max.x, r.min.y}, r.max, {r.min.x, r.max.y}});
}

bool ConvexPolygon::contains(Point p, double tolerance) const noexcept
{
    const auto n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        const Point& a = vertices_[i];
        const Point& b = vertices_[(i + 1) % n];
        const double len = distance(a, b);
        if (cross(a, b, p) < -tolerance * len)
        {
            return false;
        }
    }
    return n >= 3;
}

double ConvexPolygon::area() const noexcept
{
    double s = 0.0;
    const auto n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        const Point& p = vertices_[i];
        const Point& q = vertices_[(i + 1) % n];
        s += p.x * q.y - q.x * p.y;
    }
    return 0.5 * s;
}

Rect ConvexPolygon::bounding_box() const noexcept
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    Rect box{{inf, inf}, {-inf, -inf}};
    for (const Point& v : vertices_)
    {
        box.min.x = std::min(box.min.x, v.x);
        box.min.y = std::min(box.min.y, v.y);
        box.max.x = std::max(box.max.x, v.x);
        box.max.y = std::max(box.max.y, v.y);
    }
    return box;
}

double distance_to_segment(Point p, Point a, Point b) noexcept
{
    const Point ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    if (len2 == 0.0)
    {
        return distance(p, a);
    }
    const double t = std::clamp(((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

} // namespace chosim
