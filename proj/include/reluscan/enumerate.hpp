#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <vector>

#include "reluscan/geometry.hpp"
#include "reluscan/network.hpp"
#include "reluscan/slice.hpp"

namespace reluscan {

/// Affine functional in slice coordinates. The zero set
/// {u : gradient.u + offset = 0} is one neuron's bent-hyperplane piece
/// restricted to the cell it was computed on.
struct SplitLine {
    Vec2 gradient;
    double offset = 0.0;

    double eval(Vec2 u) const { return dot(gradient, u) + offset; }
};

/// Convex region on a slice. For k=2 the vertices are a CCW convex polygon;
/// for k=1 they are the two endpoints (x-coordinates, y=0, left < right).
/// `pattern` covers the neurons processed so far, `neuron_affines` holds the
/// functional each of them had when this cell was current.
struct Cell {
    Polygon vertices;
    ActivationPattern pattern;
    std::vector<SplitLine> neuron_affines;
    /// Network outputs as affine functions of slice coordinates; filled for
    /// completed cells.
    std::vector<SplitLine> output_affine;

    Vec2 centroid(int k) const;
    /// Area (k=2) or length (k=1).
    double measure(int k) const;
};

/// Bounding segment (k=1) or convex CCW polygon (k=2) in slice coordinates.
struct Window {
    int k = 2;
    Polygon verts;

    static Window box(double b) { return box(-b, -b, b, b); }
    static Window box(double xmin, double ymin, double xmax, double ymax);
    static Window segment(double lo, double hi);
    static Window polygon(Polygon p);

    double measure() const;
    /// Max vertex norm; scales the snap tolerances.
    double radius() const;
};

struct EnumerateOptions {
    bool retain_cells = true;
    /// Also fill linear_count by merging (needs retain_cells).
    bool merge_linear = true;
    /// 0 selects the default budget 5 * (#neurons)^k / k!.
    std::size_t cell_budget = 0;
    double snap_scale = 1e-10;
    double sliver_area_frac = 1e-14;
    double sliver_length_frac = 1e-12;
    double merge_tol = 1e-9;
};

struct RegionCensus {
    long long activation_count = 0;
    std::optional<long long> linear_count;
    std::vector<Cell> cells;
    Window window;
    long long discarded_slivers = 0;
    double wall_time_seconds = 0.0;
};

/// Functional of the next unprocessed neuron on this cell, obtained by
/// composing the masked affine maps of the layers already processed with the
/// slice embedding.
SplitLine restrict_neuron(const Network& net, const AffineSlice& slice, const Cell& cell);

struct SplitResult {
    std::vector<Cell> cells; ///< one cell (sign assigned) or two (cut)
    int discarded_slivers = 0;
};

/// Extends the cell's pattern by the sign of `line`, cutting the cell in two
/// when the vertex signs disagree. Throws DegenerateNeuronError when the
/// functional is numerically zero on the whole cell.
SplitResult split_cell(const Cell& cell, const SplitLine& line, int neuron_index, int k,
                       double snap, double sliver_min_measure);

/// Exact enumeration of the activation regions meeting the window: neurons
/// are added one by one, first to last hidden layer, each cutting the cells
/// where its functional changes sign.
RegionCensus enumerate_regions(const Network& net, const AffineSlice& slice, const Window& window,
                               const EnumerateOptions& opts = {});

/// Counts connected components of the cell-adjacency graph where edge-adjacent
/// cells are joined iff their full-input-space affine maps agree within
/// merge_tol. Stores and returns the count (always <= activation_count).
long long merge_linear_regions(RegionCensus& census, const Network& net, double merge_tol = 1e-9);

/// Distinct activation patterns seen on a uniform grid over the window;
/// boundary points are jittered by 1e-9 of the window radius. Always a subset
/// of the enumerated cells' patterns.
std::set<ActivationPattern> grid_pattern_oracle(const Network& net, const AffineSlice& slice,
                                                const Window& window, int resolution);

/// True iff every cell of the full enumeration lies inside exactly one cell
/// of the enumeration restricted to the first `layer_prefix` hidden layers.
bool refinement_check(const Network& net, const AffineSlice& slice, const Window& window,
                      int layer_prefix);

} // namespace reluscan
