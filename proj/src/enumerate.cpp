#include "reluscan/enumerate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "reluscan/errors.hpp"

namespace reluscan {

Vec2 Cell::centroid(int k) const {
    if (k == 1) return {0.5 * (vertices[0].x + vertices[1].x), 0.0};
    return polygon_centroid(vertices);
}

double Cell::measure(int k) const {
    if (k == 1) return vertices[1].x - vertices[0].x;
    return polygon_area(vertices);
}

Window Window::box(double xmin, double ymin, double xmax, double ymax) {
    if (!(xmin < xmax) || !(ymin < ymax)) throw std::invalid_argument("empty window box");
    return {2, box_polygon(xmin, ymin, xmax, ymax)};
}

Window Window::segment(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("empty window segment");
    return {1, {{lo, 0.0}, {hi, 0.0}}};
}

Window Window::polygon(Polygon p) {
    if (p.size() < 3 || polygon_area(p) <= 0.0 || !is_convex_ccw(p, 1e-12))
        throw std::invalid_argument("window must be a convex CCW polygon");
    return {2, std::move(p)};
}

double Window::measure() const {
    return k == 1 ? verts[1].x - verts[0].x : polygon_area(verts);
}

double Window::radius() const {
    double r = 0.0;
    for (const Vec2& v : verts) r = std::max(r, norm(v));
    return r;
}

namespace {

// First-layer functionals are cell-independent: w.(origin + u0 b0 + u1 b1) + b.
std::vector<SplitLine> first_layer_lines(const Network& net, const AffineSlice& slice) {
    const int rows = net.layer_width(0);
    const int n_in = net.input_dim();
    const auto w = net.layer_weights(0);
    const auto b = net.layer_biases(0);
    std::vector<SplitLine> lines(rows);
    for (int i = 0; i < rows; ++i) {
        const double* row = w.data() + static_cast<std::size_t>(i) * n_in;
        double gx = 0.0, gy = 0.0, c = b[i];
        for (int j = 0; j < n_in; ++j) {
            gx += row[j] * slice.basis[0][j];
            if (slice.dim() > 1) gy += row[j] * slice.basis[1][j];
            c += row[j] * slice.origin[j];
        }
        lines[i] = SplitLine{{gx, gy}, c};
    }
    return lines;
}

// Functional of neuron `idx` in hidden layer `layer` (layer >= 1) on a cell
// whose pattern covers all earlier layers.
SplitLine deep_neuron_line(const Network& net, const Cell& cell, int layer, int idx,
                           int prev_base) {
    const int cols = net.layer_input_dim(layer);
    const auto w = net.layer_weights(layer);
    const double* row = w.data() + static_cast<std::size_t>(idx) * cols;
    double gx = 0.0, gy = 0.0, c = net.layer_biases(layer)[idx];
    for (int m = 0; m < cols; ++m) {
        if (cell.pattern[prev_base + m] < 0) continue;
        const double wm = row[m];
        const SplitLine& a = cell.neuron_affines[prev_base + m];
        gx += wm * a.gradient.x;
        gy += wm * a.gradient.y;
        c += wm * a.offset;
    }
    return SplitLine{{gx, gy}, c};
}

std::vector<SplitLine> output_affines(const Network& net, const Cell& cell, int prev_base) {
    const int last = net.num_layers() - 1;
    const int rows = net.layer_width(last);
    std::vector<SplitLine> out(rows);
    for (int i = 0; i < rows; ++i) out[i] = deep_neuron_line(net, cell, last, i, prev_base);
    return out;
}

std::size_t default_budget(int n_neurons, int k) {
    double b = 5.0 * std::pow(static_cast<double>(std::max(n_neurons, 1)), k);
    if (k == 2) b /= 2.0;
    b = std::max(b, 64.0);
    return b > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(b);
}

} // namespace

SplitLine restrict_neuron(const Network& net, const AffineSlice& slice, const Cell& cell) {
    const int processed = static_cast<int>(cell.pattern.size());
    if (processed >= net.hidden_neuron_count())
        throw std::invalid_argument("all neurons already processed on this cell");
    auto [layer, idx] = net.locate_neuron(processed);
    if (layer == 0) return first_layer_lines(net, slice)[idx];
    int prev_base = 0;
    for (int l = 0; l + 1 < layer; ++l) prev_base += net.layer_width(l);
    return deep_neuron_line(net, cell, layer, idx, prev_base);
}

SplitResult split_cell(const Cell& cell, const SplitLine& line, int neuron_index, int k,
                       double snap, double sliver_min_measure) {
    SplitResult res;
    const std::size_t n = cell.vertices.size();
    std::vector<double> val(n);
    int n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        val[i] = line.eval(cell.vertices[i]);
        if (val[i] > snap)
            ++n_pos;
        else if (val[i] < -snap)
            ++n_neg;
        else
            val[i] = 0.0;
    }
    if (n_pos == 0 && n_neg == 0) throw DegenerateNeuronError(neuron_index);

    auto emit = [&](Polygon verts, std::int8_t sign) {
        Cell child;
        child.vertices = std::move(verts);
        child.pattern = cell.pattern;
        child.pattern.push_back(sign);
        child.neuron_affines = cell.neuron_affines;
        child.neuron_affines.push_back(line);
        res.cells.push_back(std::move(child));
    };

    if (n_neg == 0) {
        emit(cell.vertices, 1);
        return res;
    }
    if (n_pos == 0) {
        emit(cell.vertices, -1);
        return res;
    }

    Polygon pos, neg;
    if (k == 1) {
        // endpoints have strictly opposite signs here
        double t = val[0] / (val[0] - val[1]);
        double cut = cell.vertices[0].x + t * (cell.vertices[1].x - cell.vertices[0].x);
        if (val[0] > 0.0) {
            pos = {cell.vertices[0], {cut, 0.0}};
            neg = {{cut, 0.0}, cell.vertices[1]};
        } else {
            neg = {cell.vertices[0], {cut, 0.0}};
            pos = {{cut, 0.0}, cell.vertices[1]};
        }
        auto len = [](const Polygon& p) { return p[1].x - p[0].x; };
        bool keep_pos = len(pos) >= sliver_min_measure;
        bool keep_neg = len(neg) >= sliver_min_measure;
        if (!keep_pos && !keep_neg) {
            keep_pos = len(pos) >= len(neg);
            keep_neg = !keep_pos;
        }
        if (keep_pos) emit(std::move(pos), 1); else ++res.discarded_slivers;
        if (keep_neg) emit(std::move(neg), -1); else ++res.discarded_slivers;
        return res;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        if (val[i] >= 0.0) pos.push_back(cell.vertices[i]);
        if (val[i] <= 0.0) neg.push_back(cell.vertices[i]);
        if (val[i] * val[j] < 0.0) {
            double t = val[i] / (val[i] - val[j]);
            Vec2 p = cell.vertices[i] + t * (cell.vertices[j] - cell.vertices[i]);
            pos.push_back(p);
            neg.push_back(p);
        }
    }
    auto tidy = [](Polygon& p) {
        Polygon d;
        d.reserve(p.size());
        for (const Vec2& v : p)
            if (d.empty() || norm(v - d.back()) > 1e-14 * (1.0 + norm(v))) d.push_back(v);
        while (d.size() > 1 && norm(d.front() - d.back()) <= 1e-14 * (1.0 + norm(d.front())))
            d.pop_back();
        p.swap(d);
    };
    tidy(pos);
    tidy(neg);
    double area_pos = polygon_area(pos);
    double area_neg = polygon_area(neg);
    bool keep_pos = pos.size() >= 3 && area_pos >= sliver_min_measure;
    bool keep_neg = neg.size() >= 3 && area_neg >= sliver_min_measure;
    if (!keep_pos && !keep_neg) {
        // numerical corner case: keep the larger side so the cell is not lost
        keep_pos = area_pos >= area_neg;
        keep_neg = !keep_pos;
    }
    if (keep_pos) emit(std::move(pos), 1); else ++res.discarded_slivers;
    if (keep_neg) emit(std::move(neg), -1); else ++res.discarded_slivers;
    return res;
}

RegionCensus enumerate_regions(const Network& net, const AffineSlice& slice, const Window& window,
                               const EnumerateOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    slice.validate();
    if (slice.ambient_dim() != net.input_dim())
        throw std::invalid_argument("slice ambient dimension does not match the network");
    if (slice.dim() != window.k) throw std::invalid_argument("window dimension does not match the slice");
    const int k = window.k;
    const int n_neurons = net.hidden_neuron_count();
    const std::size_t budget = opts.cell_budget ? opts.cell_budget : default_budget(n_neurons, k);
    const double radius = window.radius();
    const double sliver_min = k == 2 ? opts.sliver_area_frac * window.measure()
                                     : opts.sliver_length_frac * window.measure();

    std::vector<Cell> cells(1);
    cells[0].vertices = window.verts;
    cells[0].pattern.reserve(n_neurons);

    std::vector<SplitLine> layer0;
    long long slivers = 0;
    int neuron = 0;
    int prev_base = 0;
    for (int l = 0; l < net.depth(); ++l) {
        if (l == 1) prev_base = 0;
        else if (l > 1) prev_base += net.layer_width(l - 2);
        if (l == 0) layer0 = first_layer_lines(net, slice);
        const int width = net.layer_width(l);
        for (int i = 0; i < width; ++i, ++neuron) {
            std::vector<Cell> next;
            next.reserve(cells.size() + cells.size() / 4 + 4);
            for (Cell& cell : cells) {
                SplitLine line = l == 0 ? layer0[i] : deep_neuron_line(net, cell, l, i, prev_base);
                const double snap =
                    opts.snap_scale * (1.0 + std::abs(line.offset) + norm(line.gradient) * radius);
                SplitResult sr = split_cell(cell, line, neuron, k, snap, sliver_min);
                slivers += sr.discarded_slivers;
                for (Cell& c : sr.cells) next.push_back(std::move(c));
            }
            cells.swap(next);
            if (cells.size() > budget) throw BudgetExceededError(cells.size(), budget, neuron);
        }
    }

    int last_base = 0;
    for (int l = 0; l + 1 < net.depth(); ++l) last_base += net.layer_width(l);
    for (Cell& cell : cells)
        cell.output_affine = net.depth() == 0
                                 ? first_layer_lines(net, slice)
                                 : output_affines(net, cell, last_base);

    RegionCensus census;
    census.window = window;
    census.activation_count = static_cast<long long>(cells.size());
    census.discarded_slivers = slivers;
    census.cells = std::move(cells);
    if (opts.retain_cells && opts.merge_linear) merge_linear_regions(census, net, opts.merge_tol);
    if (!opts.retain_cells) census.cells.clear();
    census.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return census;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void join(int a, int b) { parent[find(a)] = find(b); }
};

struct EdgeRecord {
    int cell;
    double t_lo, t_hi; // interval along the line direction
};

bool maps_agree(const AffineMap& a, const AffineMap& b, double tol) {
    for (std::size_t i = 0; i < a.gradient.size(); ++i) {
        double scale = 1.0 + std::max(std::abs(a.gradient[i]), std::abs(b.gradient[i]));
        if (std::abs(a.gradient[i] - b.gradient[i]) > tol * scale) return false;
    }
    for (std::size_t i = 0; i < a.offset.size(); ++i) {
        double scale = 1.0 + std::max(std::abs(a.offset[i]), std::abs(b.offset[i]));
        if (std::abs(a.offset[i] - b.offset[i]) > tol * scale) return false;
    }
    return true;
}

// Pairs of cells sharing a positive-length boundary segment. Edges are
// grouped by their supporting line; each edge is filed under every
// combination of half-bucket shifts so two nearly equal lines always land
// in one common group, then edges are overlapped along the line.
std::vector<std::pair<int, int>> adjacent_pairs_2d(const std::vector<Cell>& cells, double radius) {
    const double qnormal = 1e-7;
    const double qoffset = 1e-7 * (1.0 + radius);
    const double min_overlap = 1e-9 * (1.0 + radius);
    using Key = std::tuple<long long, long long, long long, int>;
    std::map<Key, std::vector<EdgeRecord>> groups;

    for (int ci = 0; ci < static_cast<int>(cells.size()); ++ci) {
        const Polygon& poly = cells[ci].vertices;
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            Vec2 a = poly[i];
            Vec2 b = poly[(i + 1) % n];
            Vec2 d = b - a;
            double len = norm(d);
            if (len <= 1e-13 * (1.0 + radius)) continue;
            Vec2 nrm{d.y / len, -d.x / len};
            double c = dot(nrm, a);
            if (nrm.x < -1e-12 || (std::abs(nrm.x) <= 1e-12 && nrm.y < 0.0)) {
                nrm = -1.0 * nrm;
                c = -c;
            }
            Vec2 dir{-nrm.y, nrm.x};
            double t0 = dot(dir, a), t1 = dot(dir, b);
            EdgeRecord rec{ci, std::min(t0, t1), std::max(t0, t1)};
            for (int combo = 0; combo < 8; ++combo) {
                const double sx = (combo & 1) ? 0.5 : 0.0;
                const double sy = (combo & 2) ? 0.5 : 0.0;
                const double sc = (combo & 4) ? 0.5 : 0.0;
                Key key{static_cast<long long>(std::floor(nrm.x / qnormal + sx)),
                        static_cast<long long>(std::floor(nrm.y / qnormal + sy)),
                        static_cast<long long>(std::floor(c / qoffset + sc)), combo};
                groups[key].push_back(rec);
            }
        }
    }

    std::set<std::pair<int, int>> pairs;
    for (auto& [key, edges] : groups) {
        std::sort(edges.begin(), edges.end(),
                  [](const EdgeRecord& a, const EdgeRecord& b) { return a.t_lo < b.t_lo; });
        for (std::size_t i = 0; i < edges.size(); ++i) {
            for (std::size_t j = i + 1; j < edges.size(); ++j) {
                if (edges[j].t_lo >= edges[i].t_hi - min_overlap) break;
                if (edges[i].cell == edges[j].cell) continue;
                double overlap = std::min(edges[i].t_hi, edges[j].t_hi) - edges[j].t_lo;
                if (overlap < min_overlap) continue;
                int a = std::min(edges[i].cell, edges[j].cell);
                int b = std::max(edges[i].cell, edges[j].cell);
                pairs.insert({a, b});
            }
        }
    }
    return {pairs.begin(), pairs.end()};
}

std::vector<std::pair<int, int>> adjacent_pairs_1d(const std::vector<Cell>& cells, double radius) {
    std::vector<int> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return cells[a].vertices[0].x < cells[b].vertices[0].x; });
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        double gap = cells[order[i + 1]].vertices[0].x - cells[order[i]].vertices[1].x;
        if (std::abs(gap) <= 1e-9 * (1.0 + radius))
            pairs.emplace_back(order[i], order[i + 1]);
    }
    return pairs;
}

} // namespace

long long merge_linear_regions(RegionCensus& census, const Network& net, double merge_tol) {
    if (census.cells.empty()) {
        if (census.activation_count != 0)
            throw std::invalid_argument("merge_linear_regions requires retained cells");
        census.linear_count = 0;
        return 0;
    }
    const double radius = census.window.radius();
    auto pairs = census.window.k == 2 ? adjacent_pairs_2d(census.cells, radius)
                                      : adjacent_pairs_1d(census.cells, radius);
    std::vector<AffineMap> maps;
    maps.reserve(census.cells.size());
    for (const Cell& c : census.cells) maps.push_back(cell_affine_map(net, c.pattern));
    UnionFind uf(census.cells.size());
    for (auto [a, b] : pairs)
        if (maps_agree(maps[a], maps[b], merge_tol)) uf.join(a, b);
    long long components = 0;
    for (int i = 0; i < static_cast<int>(census.cells.size()); ++i)
        if (uf.find(i) == i) ++components;
    census.linear_count = components;
    return components;
}

std::set<ActivationPattern> grid_pattern_oracle(const Network& net, const AffineSlice& slice,
                                                const Window& window, int resolution) {
    if (resolution < 2) throw std::invalid_argument("resolution must be >= 2 per axis");
    const double radius = window.radius();
    std::set<ActivationPattern> seen;
    auto probe = [&](Vec2 u) {
        for (int attempt = 0; attempt < 4; ++attempt) {
            try {
                seen.insert(pattern_at(net, slice.embed(u)));
                return;
            } catch (const BoundaryPointError&) {
                u = u + (1e-9 * (1.0 + radius) * (attempt + 1)) * Vec2{1.0, 0.7};
            }
        }
    };
    if (window.k == 1) {
        const double lo = window.verts[0].x, hi = window.verts[1].x;
        for (int i = 0; i < resolution; ++i)
            probe({lo + (hi - lo) * (i + 0.5) / resolution, 0.0});
        return seen;
    }
    double xmin = window.verts[0].x, xmax = xmin, ymin = window.verts[0].y, ymax = ymin;
    for (const Vec2& v : window.verts) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            Vec2 u{xmin + (xmax - xmin) * (i + 0.5) / resolution,
                   ymin + (ymax - ymin) * (j + 0.5) / resolution};
            if (!point_in_convex(window.verts, u, -1e-12 * (1.0 + radius))) continue;
            probe(u);
        }
    }
    return seen;
}

bool refinement_check(const Network& net, const AffineSlice& slice, const Window& window,
                      int layer_prefix) {
    if (layer_prefix < 1 || layer_prefix > net.depth())
        throw std::invalid_argument("layer_prefix out of range");
    EnumerateOptions opts;
    opts.merge_linear = false;
    RegionCensus full = enumerate_regions(net, slice, window, opts);
    if (layer_prefix == net.depth()) return true; // identical partitions by construction
    Network prefix = net.hidden_prefix(layer_prefix);
    RegionCensus coarse = enumerate_regions(prefix, slice, window, opts);

    int prefix_neurons = prefix.hidden_neuron_count();
    std::map<ActivationPattern, const Cell*> by_pattern;
    for (const Cell& c : coarse.cells) by_pattern[c.pattern] = &c;

    const double tol = 1e-9 * (1.0 + window.radius());
    for (const Cell& c : full.cells) {
        ActivationPattern head(c.pattern.begin(), c.pattern.begin() + prefix_neurons);
        auto it = by_pattern.find(head);
        if (it == by_pattern.end()) return false;
        const Polygon& host = it->second->vertices;
        for (const Vec2& v : c.vertices) {
            bool inside = window.k == 2
                              ? point_in_convex(host, v, tol)
                              : (v.x >= host[0].x - tol && v.x <= host[1].x + tol);
            if (!inside) return false;
        }
    }
    return true;
}

} // namespace reluscan
