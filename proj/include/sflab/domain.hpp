#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sflab {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator-(const Point& a, const Point& b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(const Point& a, const Point& b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator*(double c, const Point& a) { return {c * a.x, c * a.y}; }
inline double dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }

struct Interval {
    double a;
    double b;
};

struct Rectangle {
    double ax, bx;
    double ay, by;
};

struct Disk {
    double radius;
    Point center{};
};

/// Raster of interior lattice nodes for a polygonal domain. A marked node
/// (r, c) sits at ((c+1)*h, (r+1)*h), rows counted upward from the bottom;
/// every unmarked lattice node carries the homogeneous Dirichlet value.
///
/// Text form: a header line `h=<spacing>` followed by rows of '0'/'1'
/// characters, listed top to bottom.
class GridMask {
public:
    GridMask(int rows, int cols, double spacing, std::vector<std::uint8_t> cells)
        : rows_(rows), cols_(cols), spacing_(spacing), cells_(std::move(cells)) {
        if (rows_ <= 0 || cols_ <= 0)
            throw std::invalid_argument("grid mask: empty raster");
        if (spacing_ <= 0.0)
            throw std::invalid_argument("grid mask: spacing must be positive");
        if (cells_.size() != static_cast<std::size_t>(rows_) * cols_)
            throw std::invalid_argument("grid mask: cell count does not match raster size");
        for (auto v : cells_) count_ += (v != 0);
        if (count_ == 0)
            throw std::invalid_argument("grid mask: no interior nodes");
        if (!connected())
            throw std::invalid_argument("grid mask: interior nodes are not connected");
    }

    static GridMask from_string(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        double h = 0.0;
        bool have_h = false;
        std::vector<std::string> raster;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (line.empty()) continue;
            if (!have_h) {
                if (std::sscanf(line.c_str(), "h=%lf", &h) != 1)
                    throw std::invalid_argument("grid mask: first line must be h=<spacing>");
                have_h = true;
                continue;
            }
            raster.push_back(line);
        }
        if (!have_h || raster.empty())
            throw std::invalid_argument("grid mask: missing header or raster rows");
        const int rows = static_cast<int>(raster.size());
        std::size_t cols = 0;
        for (const auto& r : raster) cols = std::max(cols, r.size());
        std::vector<std::uint8_t> cells(static_cast<std::size_t>(rows) * cols, 0);
        for (int fr = 0; fr < rows; ++fr) {
            const int r = rows - 1 - fr;  // first file row is the top row
            for (std::size_t c = 0; c < raster[fr].size(); ++c) {
                const char ch = raster[fr][c];
                if (ch == '1')
                    cells[static_cast<std::size_t>(r) * cols + c] = 1;
                else if (ch != '0')
                    throw std::invalid_argument("grid mask: raster may contain only '0'/'1'");
            }
        }
        return GridMask(rows, static_cast<int>(cols), h, std::move(cells));
    }

    static GridMask from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("grid mask: cannot open '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str());
    }

    /// All-ones raster: the interior nodes of (0,(cols+1)h) x (0,(rows+1)h).
    static GridMask rectangle(int rows, int cols, double spacing) {
        return GridMask(rows, cols, spacing,
                        std::vector<std::uint8_t>(static_cast<std::size_t>(rows) * cols, 1));
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double spacing() const { return spacing_; }
    int interior_count() const { return count_; }

    bool on(int r, int c) const {
        return r >= 0 && r < rows_ && c >= 0 && c < cols_ &&
               cells_[static_cast<std::size_t>(r) * cols_ + c] != 0;
    }

    Point node_position(int r, int c) const {
        return {(c + 1) * spacing_, (r + 1) * spacing_};
    }

    bool connected() const {
        int start = -1;
        for (std::size_t i = 0; i < cells_.size(); ++i)
            if (cells_[i]) { start = static_cast<int>(i); break; }
        if (start < 0) return false;
        std::vector<std::uint8_t> seen(cells_.size(), 0);
        std::queue<int> q;
        q.push(start);
        seen[start] = 1;
        int reached = 0;
        while (!q.empty()) {
            const int i = q.front();
            q.pop();
            ++reached;
            const int r = i / cols_, c = i % cols_;
            const int nbr[4][2] = {{r + 1, c}, {r - 1, c}, {r, c + 1}, {r, c - 1}};
            for (auto& [rr, cc] : nbr) {
                if (!on(rr, cc)) continue;
                const int k = rr * cols_ + cc;
                if (!seen[k]) { seen[k] = 1; q.push(k); }
            }
        }
        return reached == count_;
    }

private:
    int rows_, cols_;
    double spacing_;
    std::vector<std::uint8_t> cells_;
    int count_ = 0;
};

struct Domain {
    std::variant<Interval, Rectangle, Disk, GridMask> shape;
    Point star_center{};

    int dimension() const { return std::holds_alternative<Interval>(shape) ? 1 : 2; }

    std::string describe() const {
        char buf[256];
        if (const auto* iv = std::get_if<Interval>(&shape)) {
            std::snprintf(buf, sizeof buf, "interval[%.17g,%.17g]", iv->a, iv->b);
        } else if (const auto* rc = std::get_if<Rectangle>(&shape)) {
            std::snprintf(buf, sizeof buf, "rectangle[%.17g,%.17g]x[%.17g,%.17g]",
                          rc->ax, rc->bx, rc->ay, rc->by);
        } else if (const auto* dk = std::get_if<Disk>(&shape)) {
            std::snprintf(buf, sizeof buf, "disk[R=%.17g,center=(%.17g,%.17g)]",
                          dk->radius, dk->center.x, dk->center.y);
        } else {
            const auto& g = std::get<GridMask>(shape);
            std::snprintf(buf, sizeof buf, "grid[%dx%d,h=%.17g,cells=%d]",
                          g.rows(), g.cols(), g.spacing(), g.interior_count());
        }
        return buf;
    }
};

}  // namespace sflab
