#pragma once

#include "fewshot/metric_head.hpp"
#include "fewshot/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fewshot {

/// Haar-distributed rotation (QR of a Gaussian matrix with sign fix).
Matrix random_rotation(Index d, Rng& rng);

/// Generative description of one synthetic domain.
struct WorldConfig {
    Index dims = 8;
    int class_count = 64;
    /// Condition number of every true class covariance.
    double anisotropy = 16.0;
    /// Radius of the shell the class means are drawn on.
    double separation = 3.0;
    /// Distance of the shell centre from the origin (random direction).
    double center_offset = 0.0;
    /// Geometric mean of the covariance eigenvalues.
    double scale = 1.0;
    std::uint64_t seed = 0;
    std::string domain_id = "synthetic";

    void validate() const;
};

struct ClusterWorld {
    WorldConfig config;
    std::vector<Vector> true_means;
    std::vector<SymMatrix> true_covariances;
    /// Cholesky factors of the true covariances, used for sampling.
    std::vector<Matrix> sampling_factors;

    Index dims() const noexcept { return config.dims; }
    int class_count() const noexcept { return static_cast<int>(true_means.size()); }
    const std::string& domain_id() const noexcept { return config.domain_id; }

    /// x ~ N(mu_c, Sigma_c).
    Vector draw(int world_class, Rng& rng) const;
};

/// Means on a shell of radius `separation`; covariances R D R^T with a random
/// rotation R and eigenvalues log-spaced over exactly [scale/sqrt(a), scale*sqrt(a)].
ClusterWorld make_cluster_world(const WorldConfig& cfg);
ClusterWorld make_cluster_world(Index dims, int class_count, double anisotropy,
                                std::uint64_t seed);

/// Affine stand-in for a task-conditioned feature extractor: z = linear * x + offset.
struct EncodingTransform {
    Matrix linear;
    Vector offset;

    static EncodingTransform identity(Index dims);
    Index dims() const noexcept { return offset.size(); }
    Vector apply(const Vector& x) const { return linear * x + offset; }
    /// The simulated task encoding: [vec(linear); offset].
    Vector encoding_vector() const;
    /// Throws SingularTransform when |det(linear)| <= 1e-9.
    void validate() const;
};

/// I + strength * G / sqrt(d) with an offset of norm about offset_scale * strength.
EncodingTransform random_encoding(Index dims, double strength, double offset_scale,
                                  std::uint64_t seed);

struct EpisodicTask {
    std::vector<LabeledExample> support;
    /// Query labels are for scoring only.
    std::vector<LabeledExample> query;
    int way = 0;
    std::vector<int> shots;
    /// World class behind each task-local label.
    std::vector<int> class_ids;
    Index dims = 0;
    std::string domain_id;
    std::uint64_t seed = 0;

    std::vector<Vector> query_features() const;
    bool operator==(const EpisodicTask&) const;
};

enum class SamplingMode { MetaDatasetLike, FixedWayShot };

struct SamplerConfig {
    SamplingMode mode = SamplingMode::MetaDatasetLike;
    int way_min = 5;
    int way_max = 50;
    int shot_min = 1;
    int shot_max = 100;
    int support_cap = 500;
    int query_per_class = 10;
    int fixed_way = 5;
    int fixed_shot = 1;

    void validate() const;

    static SamplerConfig fixed(int way, int shot, int query_per_class = 10);
};

/// Way and shots per the sampler mode, features through `encoding`.
EpisodicTask sample_task(const ClusterWorld& world, const SamplerConfig& cfg,
                         const EncodingTransform& encoding, std::uint64_t seed);

/// Per-class shots capped to a total, keeping at least one per class.
std::vector<int> cap_shots(std::vector<int> shots, int support_cap);

/// JSON Lines: a version record, then one record per task.
void write_tasks(const std::filesystem::path& path, std::span<const EpisodicTask> tasks);
void write_tasks(std::ostream& out, std::span<const EpisodicTask> tasks);
std::vector<EpisodicTask> read_tasks(const std::filesystem::path& path);
std::vector<EpisodicTask> read_tasks(std::istream& in);

}  // namespace fewshot
