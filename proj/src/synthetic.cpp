#include "streamflow/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "streamflow/errors.hpp"

namespace streamflow {
namespace {

void check_range(const ParameterRange& r, const char* name) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
        throw ConfigError(std::string("synthetic range '") + name + "' must satisfy lo <= hi");
    }
}

double draw(std::mt19937_64& rng, const ParameterRange& r) {
    if (r.lo == r.hi) return r.lo;
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

std::mt19937_64 basin_rng(std::uint64_t seed, std::uint64_t basin, std::uint64_t stream) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(basin), std::uint32_t(stream)};
    return std::mt19937_64(seq);
}

nlohmann::json range_json(const ParameterRange& r) { return nlohmann::json::array({r.lo, r.hi}); }

ParameterRange range_from(const nlohmann::json& j, const char* key, ParameterRange fallback) {
    if (!j.contains(key)) return fallback;
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError(std::string("synthetic range '") + key + "' needs [lo, hi]");
    return {v[0], v[1]};
}

// Mean length of runs of consecutive true flags (0 when there are none).
double mean_run_length(const std::vector<std::uint8_t>& flags) {
    std::size_t runs = 0, total = 0, current = 0;
    for (auto f : flags) {
        if (f) {
            ++current;
        } else if (current > 0) {
            ++runs;
            total += current;
            current = 0;
        }
    }
    if (current > 0) {
        ++runs;
        total += current;
    }
    return runs ? double(total) / double(runs) : 0.0;
}

}  // namespace

void SyntheticRanges::validate() const {
    check_range(recession_k, "recession_k");
    check_range(evaporation_c, "evaporation_c");
    check_range(initial_storage, "initial_storage");
    check_range(mean_wet_depth, "mean_wet_depth");
    check_range(wet_probability, "wet_probability");
    check_range(mean_tmax, "mean_tmax");
    check_range(area, "area");
    if (!(recession_k.lo > 0.0) || recession_k.hi > 1.0) throw ConfigError("recession_k must lie in (0, 1]");
    if (evaporation_c.lo < 0.0) throw ConfigError("evaporation_c must be >= 0");
    if (initial_storage.lo < 0.0) throw ConfigError("initial_storage must be >= 0");
    if (!(mean_wet_depth.lo > 0.0)) throw ConfigError("mean_wet_depth must be > 0");
    if (wet_probability.lo < 0.0 || wet_probability.hi > 1.0) throw ConfigError("wet_probability must lie in [0, 1]");
    if (!(area.lo > 0.0)) throw ConfigError("area must be > 0");
    if (!(attribute_noise >= 0.0)) throw ConfigError("attribute_noise must be >= 0");
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& s) {
    return {{"seed", s.seed},
            {"n_basins", s.n_basins},
            {"n_days", s.n_days},
            {"train_days", s.train_days},
            {"start", s.start.to_string()},
            {"role", std::string(role_name(s.role))},
            {"id_prefix", s.id_prefix},
            {"min_days", s.min_days},
            {"ranges",
             {{"recession_k", range_json(s.ranges.recession_k)},
              {"evaporation_c", range_json(s.ranges.evaporation_c)},
              {"initial_storage", range_json(s.ranges.initial_storage)},
              {"mean_wet_depth", range_json(s.ranges.mean_wet_depth)},
              {"wet_probability", range_json(s.ranges.wet_probability)},
              {"mean_tmax", range_json(s.ranges.mean_tmax)},
              {"area", range_json(s.ranges.area)},
              {"attribute_noise", s.ranges.attribute_noise}}}};
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    try {
        s.seed = j.value("seed", s.seed);
        s.n_basins = j.value("n_basins", s.n_basins);
        s.n_days = j.value("n_days", s.n_days);
        s.train_days = j.value("train_days", s.train_days);
        if (j.contains("start")) s.start = Date::parse(j.at("start").get<std::string>());
        if (j.contains("role")) s.role = parse_role(j.at("role").get<std::string>());
        s.id_prefix = j.value("id_prefix", s.id_prefix);
        s.min_days = j.value("min_days", s.min_days);
        if (j.contains("ranges")) {
            const auto& r = j.at("ranges");
            s.ranges.recession_k = range_from(r, "recession_k", s.ranges.recession_k);
            s.ranges.evaporation_c = range_from(r, "evaporation_c", s.ranges.evaporation_c);
            s.ranges.initial_storage = range_from(r, "initial_storage", s.ranges.initial_storage);
            s.ranges.mean_wet_depth = range_from(r, "mean_wet_depth", s.ranges.mean_wet_depth);
            s.ranges.wet_probability = range_from(r, "wet_probability", s.ranges.wet_probability);
            s.ranges.mean_tmax = range_from(r, "mean_tmax", s.ranges.mean_tmax);
            s.ranges.area = range_from(r, "area", s.ranges.area);
            s.ranges.attribute_noise = r.value("attribute_noise", s.ranges.attribute_noise);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
    }
    return s;
}

std::vector<double> simulate_linear_reservoir(const ReservoirParameters& p, std::span<const double> precip,
                                              std::span<const double> tmax) {
    if (precip.size() != tmax.size()) throw ShapeError("reservoir forcing length", precip.size(), tmax.size());
    std::vector<double> q(precip.size());
    double storage = p.s0;
    for (std::size_t t = 0; t < precip.size(); ++t) {
        q[t] = p.k * storage;
        const double available = storage + precip[t] - q[t];
        const double evap = std::min(p.c * std::max(tmax[t], 0.0), std::max(available, 0.0));
        storage = std::max(available - evap, 0.0);
    }
    return q;
}

DomainDataset generate_synthetic_family(const SyntheticSpec& spec, std::vector<ReservoirParameters>* hidden) {
    spec.ranges.validate();
    if (spec.n_basins == 0) throw ConfigError("synthetic family needs n_basins >= 1");
    if (spec.n_days <= spec.min_days) throw ConfigError("synthetic family needs n_days > sequence length");
    if (spec.train_days == 0 || spec.train_days >= spec.n_days) {
        throw ConfigError("synthetic family needs 0 < train_days < n_days");
    }
    const auto& R = spec.ranges;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<BasinRecord> basins;
    if (hidden) hidden->clear();

    for (std::size_t b = 0; b < spec.n_basins; ++b) {
        auto prng = basin_rng(spec.seed, b, 1);
        ReservoirParameters rp{draw(prng, R.recession_k), draw(prng, R.evaporation_c), draw(prng, R.initial_storage)};
        const double wet_depth = draw(prng, R.mean_wet_depth);
        const double wet_prob = draw(prng, R.wet_probability);
        const double tmax_mean = draw(prng, R.mean_tmax);
        const double area = draw(prng, R.area);
        const double phase = std::uniform_real_distribution<double>(0.0, two_pi)(prng);
        const double diurnal = std::uniform_real_distribution<double>(6.0, 12.0)(prng);
        const double humidity = std::uniform_real_distribution<double>(0.8, 1.0)(prng);

        auto wrng = basin_rng(spec.seed, b, 2);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::exponential_distribution<double> depth(1.0 / wet_depth);
        std::normal_distribution<double> temp_noise(0.0, 2.0);

        BasinRecord rec;
        char id[64];
        std::snprintf(id, sizeof id, "%s%03zu", spec.id_prefix.c_str(), b);
        rec.basin_id = id;
        rec.start = spec.start;
        const std::size_t n = spec.n_days;
        rec.forcings.assign(n * kForcingDim, 0.0);
        rec.forcing_valid.assign(n, 1);
        std::vector<double> precip(n), tmax(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double season = std::sin(two_pi * double((spec.start + std::int64_t(t)).serial()) / 365.25 + phase);
            const double p_wet = std::clamp(wet_prob * (1.0 + 0.6 * season), 0.0, 1.0);
            precip[t] = unit(wrng) < p_wet ? depth(wrng) : 0.0;
            tmax[t] = tmax_mean + 8.0 * std::sin(two_pi * double((spec.start + std::int64_t(t)).serial()) / 365.25 +
                                                 phase - 0.5) + temp_noise(wrng);
            const double tmin = tmax[t] - diurnal;
            const double vp = humidity * 610.78 * std::exp(17.27 * tmin / (tmin + 237.3));
            double* row = rec.forcings.data() + t * kForcingDim;
            row[0] = precip[t];
            row[1] = tmin;
            row[2] = tmax[t];
            row[3] = vp;
        }
        rec.discharge = MaskedSeries(simulate_linear_reservoir(rp, precip, tmax));

        // Climate indices computed from the generated weather; the hidden
        // reservoir parameters leak in through slope, LAI and NDVI.
        double p_sum = 0.0, pet_sum = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            p_sum += precip[t];
            pet_sum += rp.c * std::max(tmax[t], 0.0);
        }
        const double mean_p = p_sum / double(n);
        const double mean_pet = pet_sum / double(n);
        std::vector<std::uint8_t> high(n), low(n);
        for (std::size_t t = 0; t < n; ++t) {
            high[t] = precip[t] >= 5.0 * mean_p && precip[t] > 0.0;
            low[t] = precip[t] < 1.0;
        }
        const double high_freq = double(std::count(high.begin(), high.end(), 1)) / double(n) * 365.0;
        const double low_freq = double(std::count(low.begin(), low.end(), 1)) / double(n) * 365.0;

        auto arng = basin_rng(spec.seed, b, 3);
        std::normal_distribution<double> noise(0.0, R.attribute_noise);
        auto noisy = [&](double v) { return v * (1.0 + noise(arng)); };
        const std::vector<double> attrs{
            area,
            noisy(3000.0 - 100.0 * tmax_mean),
            noisy(100.0 * rp.k),
            mean_p,
            high_freq,
            mean_run_length(high),
            low_freq,
            mean_run_length(low),
            mean_pet,
            mean_p > 0.0 ? mean_pet / mean_p : 0.0,
            noisy(50.0 * rp.c + 0.5),
            noisy(0.2 + rp.s0 / 200.0),
        };
        const auto schema = default_static_schema();
        rec.static_attributes = attrs;
        if (rec.static_attributes.size() != schema.size()) throw ShapeError("synthetic attributes", schema.size(), attrs.size());
        basins.push_back(std::move(rec));
        if (hidden) hidden->push_back(rp);
    }
    const DateRange train{spec.start, spec.start + std::int64_t(spec.train_days)};
    const DateRange test{train.end, spec.start + std::int64_t(spec.n_days)};
    DomainDataset ds = make_domain(spec.role, default_static_schema(), std::move(basins), train, test);
    ds.units = {{"precip", "mm/day"},       {"tmin", "degC"},       {"tmax", "degC"},
                {"vapor_pressure", "Pa"},   {"discharge", "mm/day"}, {"generator", "linear_reservoir"}};
    return ds;
}

DomainDataset inject_gaps(const DomainDataset& dataset, std::uint64_t seed, double gap_fraction) {
    if (!(gap_fraction >= 0.0 && gap_fraction < 1.0)) throw ConfigError("gap_fraction must lie in [0, 1)");
    DomainDataset out = dataset;
    constexpr std::size_t kMeanBlock = 30;
    for (std::size_t b = 0; b < out.basins.size(); ++b) {
        auto& rec = out.basins[b];
        const std::size_t n = rec.days();
        const auto masked = std::size_t(std::floor(gap_fraction * double(n)));
        if (masked == 0) continue;
        auto rng = basin_rng(seed, b, 7);
        const std::size_t blocks = std::clamp<std::size_t>((masked + kMeanBlock - 1) / kMeanBlock, 1, masked);
        const std::size_t free_days = n - masked;

        // Block lengths: a random composition of `masked` into `blocks` positive parts.
        std::vector<std::size_t> cuts;
        if (blocks > 1) {
            std::vector<std::size_t> pool(masked - 1);
            for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i + 1;
            std::shuffle(pool.begin(), pool.end(), rng);
            cuts.assign(pool.begin(), pool.begin() + std::ptrdiff_t(blocks - 1));
            std::sort(cuts.begin(), cuts.end());
        }
        std::vector<std::size_t> lengths;
        std::size_t prev = 0;
        for (auto c : cuts) {
            lengths.push_back(c - prev);
            prev = c;
        }
        lengths.push_back(masked - prev);

        // Observed stretches: `free_days` split into blocks + 1 non-negative parts.
        std::vector<std::size_t> spaces;
        std::uniform_int_distribution<std::size_t> pick(0, free_days);
        for (std::size_t i = 0; i < blocks; ++i) spaces.push_back(pick(rng));
        std::sort(spaces.begin(), spaces.end());
        std::size_t pos = 0, last_space = 0;
        for (std::size_t i = 0; i < blocks; ++i) {
            pos += spaces[i] - last_space;
            last_space = spaces[i];
            for (std::size_t d = 0; d < lengths[i]; ++d) {
                rec.discharge.observed[pos + d] = 0;
                rec.discharge.values[pos + d] = 0.0;
            }
            pos += lengths[i];
        }
    }
    return out;
}

}  // namespace streamflow
