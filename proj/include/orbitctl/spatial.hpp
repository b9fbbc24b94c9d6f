#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

namespace orbitctl {

/// Uniform bucket grid over a fixed point set in the plane; nearest-neighbour
/// and radius queries.
class PointGrid {
public:
    explicit PointGrid(std::span<const std::complex<double>> pts) : pts_(pts.begin(), pts.end())
    {
        if (pts_.empty()) return;
        double x0 = pts_[0].real(), x1 = x0, y0 = pts_[0].imag(), y1 = y0;
        for (auto p : pts_) {
            x0 = std::min(x0, p.real());
            x1 = std::max(x1, p.real());
            y0 = std::min(y0, p.imag());
            y1 = std::max(y1, p.imag());
        }
        const double extent = std::max({x1 - x0, y1 - y0, 1e-12});
        cell_ = extent / std::max(1.0, std::sqrt(static_cast<double>(pts_.size())));
        ox_ = x0;
        oy_ = y0;
        for (std::size_t i = 0; i < pts_.size(); ++i) buckets_[key(cell_of(pts_[i]))].push_back(i);
    }

    std::size_t size() const noexcept { return pts_.size(); }
    std::complex<double> point(std::size_t i) const { return pts_[i]; }

    /// Index of, and distance to, the nearest stored point other than `skip`.
    std::pair<std::size_t, double> nearest(std::complex<double> z, std::size_t skip = npos) const
    {
        std::size_t best = npos;
        double best_d = std::numeric_limits<double>::infinity();
        if (pts_.empty() || (pts_.size() == 1 && skip == 0)) return {best, best_d};
        const auto [cx, cy] = cell_of(z);
        for (std::int64_t ring = 0;; ++ring) {
            for (std::int64_t ix = cx - ring; ix <= cx + ring; ++ix) {
                for (std::int64_t iy = cy - ring; iy <= cy + ring; ++iy) {
                    if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring) continue;
                    auto it = buckets_.find(key({ix, iy}));
                    if (it == buckets_.end()) continue;
                    for (auto i : it->second) {
                        if (i == skip) continue;
                        const double d = std::abs(pts_[i] - z);
                        if (d < best_d || (d == best_d && i < best)) {
                            best_d = d;
                            best = i;
                        }
                    }
                }
            }
            // Anything in ring r+1 or beyond is at least r*cell away.
            if (best != npos && best_d <= static_cast<double>(ring) * cell_) break;
            if (ring > max_ring_) {
                // Far outside the grid: fall back to a linear scan.
                for (std::size_t i = 0; i < pts_.size(); ++i) {
                    if (i == skip) continue;
                    const double d = std::abs(pts_[i] - z);
                    if (d < best_d) {
                        best_d = d;
                        best = i;
                    }
                }
                break;
            }
        }
        return {best, best_d};
    }

    /// Indices of all points within distance r of z.
    std::vector<std::size_t> within(std::complex<double> z, double r) const
    {
        std::vector<std::size_t> out;
        const std::int64_t span = static_cast<std::int64_t>(std::ceil(r / cell_));
        const auto [cx, cy] = cell_of(z);
        if (span > max_ring_) {
            for (std::size_t i = 0; i < pts_.size(); ++i)
                if (std::abs(pts_[i] - z) <= r) out.push_back(i);
            return out;
        }
        for (std::int64_t ix = cx - span; ix <= cx + span; ++ix)
            for (std::int64_t iy = cy - span; iy <= cy + span; ++iy) {
                auto it = buckets_.find(key({ix, iy}));
                if (it == buckets_.end()) continue;
                for (auto i : it->second)
                    if (std::abs(pts_[i] - z) <= r) out.push_back(i);
            }
        std::sort(out.begin(), out.end());
        return out;
    }

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

private:
    struct Cell {
        std::int64_t x, y;
    };

    Cell cell_of(std::complex<double> z) const
    {
        auto clampi = [](double v) {
            return static_cast<std::int64_t>(std::clamp(std::floor(v), -1e12, 1e12));
        };
        return {clampi((z.real() - ox_) / cell_), clampi((z.imag() - oy_) / cell_)};
    }

    static std::uint64_t key(Cell c)
    {
        return (static_cast<std::uint64_t>(c.x) * 0x9E3779B97F4A7C15ull) ^ static_cast<std::uint64_t>(c.y);
    }

    std::vector<std::complex<double>> pts_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
    double cell_ = 1.0, ox_ = 0.0, oy_ = 0.0;
    std::int64_t max_ring_ = 64;
};

/// Collapses points closer than `tol` onto the first representative; keeps order.
inline std::vector<std::complex<double>> deduplicate(std::span<const std::complex<double>> pts, double tol)
{
    std::vector<std::complex<double>> out;
    if (pts.empty()) return out;
    PointGrid grid(pts);
    std::vector<char> dropped(pts.size(), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (dropped[i]) continue;
        out.push_back(pts[i]);
        for (auto j : grid.within(pts[i], tol))
            if (j > i) dropped[j] = 1;
    }
    return out;
}

} // namespace orbitctl
