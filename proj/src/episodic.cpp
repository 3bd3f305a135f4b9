#include "fewshot/episodic.hpp"

#include "fewshot/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace fewshot {

using json = nlohmann::json;

namespace {

constexpr const char* kTaskFormat = "fewshot-tasks";
constexpr const char* kTaskVersion = "v1";

Vector gaussian_vector(Index d, Rng& rng) {
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = rng.normal();
    return v;
}

}  // namespace

Matrix random_rotation(Index d, Rng& rng) {
    Matrix g(d, d);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < d; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

void WorldConfig::validate() const {
    if (dims < 2) throw InvalidConfig("world: dims must be at least 2");
    if (class_count < 2) throw InvalidConfig("world: class_count must be at least 2");
    if (!(anisotropy >= 1.0)) throw InvalidConfig("world: anisotropy must be >= 1");
    if (!(separation >= 0.0)) throw InvalidConfig("world: separation must be >= 0");
    if (!(center_offset >= 0.0)) throw InvalidConfig("world: center_offset must be >= 0");
    if (!(scale > 0.0)) throw InvalidConfig("world: scale must be positive");
}

Vector ClusterWorld::draw(int world_class, Rng& rng) const {
    return true_means.at(world_class) + sampling_factors.at(world_class) * gaussian_vector(dims(), rng);
}

ClusterWorld make_cluster_world(const WorldConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const Index d = cfg.dims;
    ClusterWorld world;
    world.config = cfg;
    Vector eig(d);
    for (Index i = 0; i < d; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(d - 1) - 0.5;
        eig(i) = cfg.scale * std::pow(cfg.anisotropy, t);
    }
    Vector center = gaussian_vector(d, rng);
    center *= cfg.center_offset / center.norm();
    for (int c = 0; c < cfg.class_count; ++c) {
        Vector dir = gaussian_vector(d, rng);
        world.true_means.push_back(center + cfg.separation * dir / dir.norm());
        const Matrix rot = random_rotation(d, rng);
        SymMatrix cov(rot * eig.asDiagonal() * rot.transpose());
        world.sampling_factors.push_back(cholesky(cov).lower());
        world.true_covariances.push_back(std::move(cov));
    }
    return world;
}

ClusterWorld make_cluster_world(Index dims, int class_count, double anisotropy,
                                std::uint64_t seed) {
    WorldConfig cfg;
    cfg.dims = dims;
    cfg.class_count = class_count;
    cfg.anisotropy = anisotropy;
    cfg.seed = seed;
    return make_cluster_world(cfg);
}

EncodingTransform EncodingTransform::identity(Index dims) {
    return EncodingTransform{Matrix::Identity(dims, dims), Vector::Zero(dims)};
}

Vector EncodingTransform::encoding_vector() const {
    Vector v(linear.size() + offset.size());
    v.head(linear.size()) = linear.reshaped();
    v.tail(offset.size()) = offset;
    return v;
}

void EncodingTransform::validate() const {
    if (linear.rows() != linear.cols() || linear.rows() != offset.size()) {
        throw DimensionMismatch("encoding transform: linear part and offset disagree");
    }
    const double det = linear.determinant();
    if (!(std::abs(det) > 1e-9)) {
        throw SingularTransform("encoding transform is singular (|det| = " +
                                std::to_string(std::abs(det)) + ")");
    }
}

EncodingTransform random_encoding(Index dims, double strength, double offset_scale,
                                  std::uint64_t seed) {
    Rng rng(seed);
    EncodingTransform t = EncodingTransform::identity(dims);
    const double s = strength / std::sqrt(static_cast<double>(dims));
    for (Index j = 0; j < dims; ++j)
        for (Index i = 0; i < dims; ++i) t.linear(i, j) += s * rng.normal();
    t.offset = (offset_scale * s) * gaussian_vector(dims, rng);
    t.validate();
    return t;
}

std::vector<Vector> EpisodicTask::query_features() const {
    std::vector<Vector> out;
    out.reserve(query.size());
    for (const auto& q : query) out.push_back(q.features);
    return out;
}

namespace {

bool same_examples(const std::vector<LabeledExample>& a, const std::vector<LabeledExample>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].label != b[i].label || a[i].features.size() != b[i].features.size()) return false;
        for (Index j = 0; j < a[i].features.size(); ++j) {
            // Bit-pattern equality; distinguishes -0.0 from 0.0.
            const double x = a[i].features(j), y = b[i].features(j);
            if (std::memcmp(&x, &y, sizeof(double)) != 0) return false;
        }
    }
    return true;
}

}  // namespace

bool EpisodicTask::operator==(const EpisodicTask& o) const {
    return way == o.way && shots == o.shots && class_ids == o.class_ids && dims == o.dims &&
           domain_id == o.domain_id && seed == o.seed && same_examples(support, o.support) &&
           same_examples(query, o.query);
}

void SamplerConfig::validate() const {
    if (way_min < 1 || way_max < way_min) throw InvalidConfig("sampler: bad way range");
    if (shot_min < 1 || shot_max < shot_min) throw InvalidConfig("sampler: bad shot range");
    if (support_cap <= 0) throw InvalidConfig("sampler: support_cap must be positive");
    if (query_per_class < 0) throw InvalidConfig("sampler: query_per_class must be >= 0");
    if (mode == SamplingMode::FixedWayShot && (fixed_way < 1 || fixed_shot < 1)) {
        throw InvalidConfig("sampler: fixed way and shot must be positive");
    }
}

SamplerConfig SamplerConfig::fixed(int way, int shot, int query_per_class) {
    SamplerConfig cfg;
    cfg.mode = SamplingMode::FixedWayShot;
    cfg.fixed_way = way;
    cfg.fixed_shot = shot;
    cfg.query_per_class = query_per_class;
    return cfg;
}

std::vector<int> cap_shots(std::vector<int> shots, int support_cap) {
    const long total = std::accumulate(shots.begin(), shots.end(), 0L);
    if (total <= support_cap) return shots;
    if (static_cast<long>(shots.size()) > support_cap) {
        throw InvalidConfig("cap_shots: more classes than the support cap");
    }
    const double ratio = static_cast<double>(support_cap) / static_cast<double>(total);
    long capped = 0;
    for (int& s : shots) {
        s = std::max(1, static_cast<int>(std::floor(s * ratio)));
        capped += s;
    }
    // Flooring at one can overshoot; trim the largest classes first.
    while (capped > support_cap) {
        auto it = std::max_element(shots.begin(), shots.end());
        --*it;
        --capped;
    }
    return shots;
}

EpisodicTask sample_task(const ClusterWorld& world, const SamplerConfig& cfg,
                         const EncodingTransform& encoding, std::uint64_t seed) {
    cfg.validate();
    if (encoding.dims() != world.dims()) {
        throw DimensionMismatch("sample_task: encoding and world dimensions differ");
    }
    Rng rng(seed);
    const int available = world.class_count();
    int way;
    std::vector<int> shots;
    if (cfg.mode == SamplingMode::FixedWayShot) {
        way = cfg.fixed_way;
        if (way > available) throw NotEnoughClasses(way, available);
        shots.assign(way, cfg.fixed_shot);
    } else {
        way = static_cast<int>(rng.uniform_int(cfg.way_min, cfg.way_max));
        way = std::min(way, available);
        for (int k = 0; k < way; ++k) {
            shots.push_back(static_cast<int>(rng.uniform_int(cfg.shot_min, cfg.shot_max)));
        }
        shots = cap_shots(std::move(shots), cfg.support_cap);
    }

    // Partial Fisher-Yates: the first `way` entries are a uniform draw
    // without replacement.
    std::vector<int> pool(available);
    std::iota(pool.begin(), pool.end(), 0);
    for (int k = 0; k < way; ++k) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(k, available - 1));
        std::swap(pool[k], pool[j]);
    }

    EpisodicTask task;
    task.way = way;
    task.shots = shots;
    task.class_ids.assign(pool.begin(), pool.begin() + way);
    task.dims = world.dims();
    task.domain_id = world.domain_id();
    task.seed = seed;
    for (int k = 0; k < way; ++k) {
        const int c = task.class_ids[k];
        for (int s = 0; s < shots[k]; ++s) {
            task.support.push_back({encoding.apply(world.draw(c, rng)), k});
        }
        for (int q = 0; q < cfg.query_per_class; ++q) {
            task.query.push_back({encoding.apply(world.draw(c, rng)), k});
        }
    }
    return task;
}

namespace {

json examples_to_json(const std::vector<LabeledExample>& xs) {
    json arr = json::array();
    for (const auto& ex : xs) {
        arr.push_back({{"label", ex.label},
                       {"features", std::vector<double>(ex.features.data(),
                                                        ex.features.data() + ex.features.size())}});
    }
    return arr;
}

std::vector<LabeledExample> examples_from_json(const json& arr, Index dims) {
    std::vector<LabeledExample> out;
    for (const auto& e : arr) {
        const auto f = e.at("features").get<std::vector<double>>();
        if (static_cast<Index>(f.size()) != dims) {
            throw std::invalid_argument("feature vector of length " + std::to_string(f.size()) +
                                        ", expected " + std::to_string(dims));
        }
        out.push_back({Eigen::Map<const Vector>(f.data(), dims), e.at("label").get<int>()});
    }
    return out;
}

}  // namespace

void write_tasks(std::ostream& out, std::span<const EpisodicTask> tasks) {
    out << json{{"format", kTaskFormat}, {"version", kTaskVersion}}.dump() << '\n';
    for (const auto& t : tasks) {
        json rec;
        rec["domain_id"] = t.domain_id;
        rec["seed"] = t.seed;
        rec["way"] = t.way;
        rec["dims"] = t.dims;
        rec["shots"] = t.shots;
        rec["class_ids"] = t.class_ids;
        rec["support"] = examples_to_json(t.support);
        rec["query"] = examples_to_json(t.query);
        out << rec.dump() << '\n';
    }
}

void write_tasks(const std::filesystem::path& path, std::span<const EpisodicTask> tasks) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_tasks(out, tasks);
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<EpisodicTask> read_tasks(std::istream& in) {
    std::vector<EpisodicTask> tasks;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json rec = json::parse(line);
            if (!header_seen) {
                if (rec.value("format", "") != kTaskFormat ||
                    rec.value("version", "") != kTaskVersion) {
                    throw FormatError(line_no, "expected version record {\"format\": \"" +
                                                   std::string(kTaskFormat) +
                                                   "\", \"version\": \"v1\"}");
                }
                header_seen = true;
                continue;
            }
            EpisodicTask t;
            t.domain_id = rec.at("domain_id").get<std::string>();
            t.seed = rec.at("seed").get<std::uint64_t>();
            t.way = rec.at("way").get<int>();
            t.dims = rec.at("dims").get<Index>();
            t.shots = rec.at("shots").get<std::vector<int>>();
            t.class_ids = rec.value("class_ids", std::vector<int>{});
            t.support = examples_from_json(rec.at("support"), t.dims);
            t.query = examples_from_json(rec.at("query"), t.dims);
            if (static_cast<int>(t.shots.size()) != t.way) {
                throw std::invalid_argument("shots has " + std::to_string(t.shots.size()) +
                                            " entries for way " + std::to_string(t.way));
            }
            tasks.push_back(std::move(t));
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception& e) {
            throw FormatError(line_no, e.what());
        }
    }
    if (!header_seen) throw FormatError(line_no, "missing version record");
    return tasks;
}

std::vector<EpisodicTask> read_tasks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return read_tasks(in);
}

}  // namespace fewshot
