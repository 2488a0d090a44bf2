#pragma once

#include "image.hpp"

#include <Eigen/Core>

#include <vector>

namespace gsrc {

struct PatchGeometry {
    int patch_side = 7;   // sqrt(bc)
    int stride = 4;       // step between reference patches
    int window_side = 30; // search window L
    int k = 60;           // similar patches per group

    int patch_size() const { return patch_side * patch_side; }

    // Throws unless 1 <= patch_side <= min(image dims), stride >= 1,
    // window_side >= patch_side and k >= 1.
    void validate(int image_width, int image_height) const;
};

struct Pos {
    int row = 0;
    int col = 0;

    friend bool operator==(const Pos&, const Pos&) = default;
};

// k patch positions sorted by ascending match distance; the reference is
// always first. Groups near image borders may hold fewer than geometry.k
// members when the clamped window has fewer candidates.
struct GroupIndex {
    Pos reference;
    std::vector<Pos> members;
};

// bc x k matrix whose columns are vectorized (row-major) patches.
struct PatchGroup {
    int patch_side = 0;
    Eigen::MatrixXd values;
};

// Top-left positions of reference patches on the stride grid; the last
// position per axis is clamped so patches reach the image border.
std::vector<Pos> reference_positions(int width, int height, const PatchGeometry& geometry);

// kNN search over every valid patch position whose top-left lies in the
// window_side x window_side window centered on the reference top-left,
// clamped to the image. Distance is the squared Euclidean distance of
// vectorized patches; ties break by (row, col) ascending.
GroupIndex block_match(const Image& image, const Pos& reference, const PatchGeometry& geometry);

PatchGroup gather_group(const Image& image, const GroupIndex& index, int patch_side);

// Accumulates patch contributions; finish() divides by the per-pixel
// coverage count. Merge order defines the float summation order, so
// callers that run chunked keep results scheduling-independent by merging
// chunk accumulators in a fixed order.
class Aggregator {
public:
    Aggregator(int width, int height);

    void add(const PatchGroup& group, const GroupIndex& index);
    void merge(const Aggregator& other);

    // Throws if any pixel is uncovered (a geometry bug).
    Image finish() const;

private:
    int width_;
    int height_;
    std::vector<double> sum_;
    std::vector<double> count_;
};

Image aggregate_groups(const std::vector<PatchGroup>& groups, const std::vector<GroupIndex>& indices,
                       int width, int height);

} // namespace gsrc
