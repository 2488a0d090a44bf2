#include "patch.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>

namespace gsrc {

void PatchGeometry::validate(int image_width, int image_height) const {
    if (patch_side < 1)
        fail(errc::invalid_argument, "patch_side must be >= 1");
    if (patch_side > image_width || patch_side > image_height)
        fail(errc::invalid_argument, "image smaller than one patch (" + std::to_string(image_width) + "x" +
                                         std::to_string(image_height) + " vs patch " +
                                         std::to_string(patch_side) + ")");
    if (stride < 1)
        fail(errc::invalid_argument, "stride must be >= 1");
    if (window_side < patch_side)
        fail(errc::invalid_argument, "window_side must be >= patch_side");
    if (k < 1)
        fail(errc::invalid_argument, "k must be >= 1");
}

namespace {

std::vector<int> grid_positions(int extent, int patch, int stride) {
    std::vector<int> grid;
    for (int p = 0;; p += stride) {
        if (p >= extent - patch) {
            grid.push_back(extent - patch);
            break;
        }
        grid.push_back(p);
    }
    return grid;
}

} // namespace

std::vector<Pos> reference_positions(int width, int height, const PatchGeometry& geometry) {
    geometry.validate(width, height);
    const std::vector<int> rows = grid_positions(height, geometry.patch_side, geometry.stride);
    const std::vector<int> cols = grid_positions(width, geometry.patch_side, geometry.stride);
    std::vector<Pos> out;
    out.reserve(rows.size() * cols.size());
    for (int r : rows)
        for (int c : cols)
            out.push_back(Pos{r, c});
    return out;
}

GroupIndex block_match(const Image& image, const Pos& reference, const PatchGeometry& geometry) {
    geometry.validate(image.width, image.height);
    const int patch = geometry.patch_side;
    if (reference.row < 0 || reference.col < 0 || reference.row + patch > image.height ||
        reference.col + patch > image.width)
        fail(errc::invalid_argument, "block_match: reference is not a valid patch position");

    const int half_lo = (geometry.window_side - 1) / 2;
    const int row_lo = std::max(0, reference.row - half_lo);
    const int row_hi = std::min(image.height - patch, reference.row - half_lo + geometry.window_side - 1);
    const int col_lo = std::max(0, reference.col - half_lo);
    const int col_hi = std::min(image.width - patch, reference.col - half_lo + geometry.window_side - 1);

    struct Candidate {
        double dist;
        Pos pos;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(row_hi - row_lo + 1) *
                       static_cast<std::size_t>(col_hi - col_lo + 1));

    for (int r = row_lo; r <= row_hi; ++r) {
        for (int c = col_lo; c <= col_hi; ++c) {
            if (r == reference.row && c == reference.col)
                continue;
            double dist = 0.0;
            for (int i = 0; i < patch; ++i) {
                const double* ref_row = &image.data[static_cast<std::size_t>(reference.row + i) * image.width +
                                                    reference.col];
                const double* cand_row = &image.data[static_cast<std::size_t>(r + i) * image.width + c];
                for (int j = 0; j < patch; ++j) {
                    const double d = ref_row[j] - cand_row[j];
                    dist += d * d;
                }
            }
            candidates.push_back({dist, Pos{r, c}});
        }
    }

    const auto by_distance_then_position = [](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist)
            return a.dist < b.dist;
        if (a.pos.row != b.pos.row)
            return a.pos.row < b.pos.row;
        return a.pos.col < b.pos.col;
    };

    // Window may hold fewer than k candidates on tiny images; the group
    // degrades to what is available.
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(geometry.k) - 1, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), by_distance_then_position);

    GroupIndex index;
    index.reference = reference;
    index.members.reserve(keep + 1);
    index.members.push_back(reference);
    for (std::size_t i = 0; i < keep; ++i)
        index.members.push_back(candidates[i].pos);
    return index;
}

PatchGroup gather_group(const Image& image, const GroupIndex& index, int patch_side) {
    const int patch = patch_side;
    const int bc = patch * patch;
    PatchGroup group;
    group.patch_side = patch;
    group.values.resize(bc, static_cast<Eigen::Index>(index.members.size()));
    for (std::size_t m = 0; m < index.members.size(); ++m) {
        const Pos& pos = index.members[m];
        if (pos.row < 0 || pos.col < 0 || pos.row + patch > image.height || pos.col + patch > image.width)
            fail(errc::invalid_argument, "gather_group: out-of-bounds patch position");
        int row_out = 0;
        for (int i = 0; i < patch; ++i)
            for (int j = 0; j < patch; ++j)
                group.values(row_out++, static_cast<Eigen::Index>(m)) = image.at(pos.row + i, pos.col + j);
    }
    return group;
}

Aggregator::Aggregator(int width, int height)
    : width_(width), height_(height),
      sum_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0),
      count_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0) {}

void Aggregator::add(const PatchGroup& group, const GroupIndex& index) {
    const int patch = group.patch_side;
    if (group.values.cols() != static_cast<Eigen::Index>(index.members.size()))
        fail(errc::dimension_mismatch, "aggregate: group/index column count mismatch");
    if (group.values.rows() != patch * patch)
        fail(errc::dimension_mismatch, "aggregate: group row count is not patch_side^2");
    for (std::size_t m = 0; m < index.members.size(); ++m) {
        const Pos& pos = index.members[m];
        if (pos.row < 0 || pos.col < 0 || pos.row + patch > height_ || pos.col + patch > width_)
            fail(errc::invalid_argument, "aggregate: out-of-bounds patch position");
        int row_in = 0;
        for (int i = 0; i < patch; ++i) {
            const std::size_t base = static_cast<std::size_t>(pos.row + i) * width_ + pos.col;
            for (int j = 0; j < patch; ++j) {
                sum_[base + j] += group.values(row_in++, static_cast<Eigen::Index>(m));
                count_[base + j] += 1.0;
            }
        }
    }
}

void Aggregator::merge(const Aggregator& other) {
    if (other.width_ != width_ || other.height_ != height_)
        fail(errc::dimension_mismatch, "aggregate: merging accumulators of different sizes");
    for (std::size_t i = 0; i < sum_.size(); ++i) {
        sum_[i] += other.sum_[i];
        count_[i] += other.count_[i];
    }
}

Image Aggregator::finish() const {
    Image out(width_, height_);
    for (std::size_t i = 0; i < sum_.size(); ++i) {
        if (count_[i] == 0.0)
            fail(errc::internal, "aggregate: uncovered pixel (geometry bug)");
        out.data[i] = sum_[i] / count_[i];
    }
    return out;
}

Image aggregate_groups(const std::vector<PatchGroup>& groups, const std::vector<GroupIndex>& indices,
                       int width, int height) {
    if (groups.size() != indices.size())
        fail(errc::dimension_mismatch, "aggregate_groups: groups/indices length mismatch");
    Aggregator acc(width, height);
    for (std::size_t g = 0; g < groups.size(); ++g)
        acc.add(groups[g], indices[g]);
    return acc.finish();
}

} // namespace gsrc
