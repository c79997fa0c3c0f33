#include <cmath>
#include <sstream>

#include "streamflow/csv.hpp"
#include "streamflow/errors.hpp"
#include "streamflow/training.hpp"

namespace streamflow {

std::map<std::string, double> EvaluationResult::nse_map() const {
    std::map<std::string, double> out;
    for (const auto& s : scores) out[s.basin_id] = s.nse;
    return out;
}

EvaluationResult evaluate(const ParameterSet& params, const SampleSet& samples) {
    if (!(params.config() == samples.config())) {
        throw ShapeError("evaluation model config", samples.config().input_dim(), params.config().input_dim());
    }
    const auto& basins = samples.basins();
    EvaluationResult result;
    result.predictions.resize(basins.size());
    for (std::size_t b = 0; b < basins.size(); ++b) result.predictions[b].basin_id = basins[b].basin_id;

    ForwardTrace trace;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample s = samples.at(i);
        auto& pred = result.predictions[s.basin_index];
        pred.dates.push_back(s.target_date);
        pred.predicted.push_back(forward_into(params, s.window, trace));
        pred.observed.push_back(s.target_observed ? s.target : 0.0);
        pred.observed_mask.push_back(s.target_observed ? 1 : 0);
    }

    std::vector<double> values;
    for (const auto& pred : result.predictions) {
        if (pred.dates.empty()) continue;  // basin not in this set
        const MaskedSeries obs{pred.observed, pred.observed_mask};
        try {
            const double v = nse(pred.predicted, obs);
            result.scores.push_back({pred.basin_id, v, obs.observed_count()});
            values.push_back(v);
        } catch (const InsufficientDataError&) {
            result.excluded.push_back(pred.basin_id);
            result.warnings.push_back("basin '" + pred.basin_id + "' excluded: fewer than two observed targets");
        } catch (const DegenerateVarianceError&) {
            result.excluded.push_back(pred.basin_id);
            result.warnings.push_back("basin '" + pred.basin_id + "' excluded: observed discharge is constant");
        }
    }
    std::erase_if(result.predictions, [](const BasinPrediction& p) { return p.dates.empty(); });
    if (!values.empty()) result.summary = summarize(values);
    return result;
}

EvaluationResult evaluate(const ParameterSet& params, const DomainDataset& dataset, RangeKind range,
                          const NormStats* norm) {
    SampleOptions opts;
    opts.norm = norm;
    opts.require_observed_target = false;
    const SampleSet set = make_samples(dataset, range, params.config(), opts);
    return evaluate(params, set);
}

std::string per_basin_nse_csv(const EvaluationResult& result) {
    std::ostringstream os;
    os << "basin_id,nse,samples\n";
    for (const auto& s : result.scores) os << s.basin_id << ',' << csv::format_double(s.nse) << ',' << s.samples << '\n';
    return os.str();
}

}  // namespace streamflow
