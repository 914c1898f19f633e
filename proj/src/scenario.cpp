#include "offsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "offsim/config.hpp"
#include "offsim/csv.hpp"
#include "offsim/random.hpp"

namespace offsim {

void ScenarioTrace::validate() const {
    if (frames.empty()) throw TraceError("trace has no frames");
    const auto& keys = frames.front().map_partial;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const auto& f = frames[t];
        if (f.features.size() != k)
            throw TraceError("frame " + std::to_string(t) + ": expected " + std::to_string(k) + " features");
        if (!(f.map_full >= 0 && f.map_full <= 1))
            throw TraceError("frame " + std::to_string(t) + ": map_full outside [0,1]");
        if (f.map_partial.size() != keys.size())
            throw TraceError("frame " + std::to_string(t) + ": inconsistent partial-fusion keys");
        for (const auto& [key, value] : f.map_partial) {
            if (!keys.count(key))
                throw TraceError("frame " + std::to_string(t) + ": unexpected partial key " + key);
            if (!(value >= 0 && value <= 1))
                throw TraceError("frame " + std::to_string(t) + ": map_" + key + " outside [0,1]");
        }
    }
}

void GeneratorParams::validate() const {
    if (!(alpha >= 0 && alpha < 1)) throw DomainError("scenario.alpha must lie in [0,1)");
    if (!(span > 0)) throw DomainError("scenario.span must be > 0");
    if (!(base >= 0 && base <= 1)) throw DomainError("scenario.base must lie in [0,1]");
    if (!(mu >= 0 && mu <= 1)) throw DomainError("scenario.mu must lie in [0,1]");
    if (k < 1) throw DomainError("scenario.k must be >= 1");
    if (z_noise < 0 || map_noise < 0 || feature_noise < 0) throw DomainError("scenario noise levels must be >= 0");
    if (degradation_base < 0 || degradation_slope < 0) throw DomainError("scenario degradation must be >= 0");
}

std::vector<std::string> partial_keys(const SystemParams& params) {
    std::vector<std::string> keys;
    for (const Action a : params.action_set)
        if (a.offloaded > 0) keys.push_back(params.local_subset_id(a));
    return keys;
}

ScenarioTrace generate_synthetic(const GeneratorParams& gen, const SystemParams& params, std::size_t n_frames,
                                 std::uint64_t seed) {
    gen.validate();
    params.validate();
    if (n_frames < 1) throw DomainError("n_frames must be >= 1");

    const auto k = static_cast<std::size_t>(gen.k);
    std::vector<double> weight(k), bias(k);
    Rng embed(gen.embedding_seed);
    for (std::size_t j = 0; j < k; ++j) {
        // Keep every feature informative: |weight| in [0.3, 1].
        const double magnitude = 0.3 + 0.7 * embed.uniform();
        weight[j] = (embed.uniform() < 0.5 ? -1.0 : 1.0) * magnitude;
        bias[j] = 0.4 * embed.uniform() - 0.2;
    }

    std::vector<std::pair<std::string, double>> subsets;  // id -> fraction of offloadable pipelines missing
    for (const Action a : params.action_set)
        if (a.offloaded > 0)
            subsets.emplace_back(params.local_subset_id(a),
                                 static_cast<double>(a.offloaded) / static_cast<double>(params.n_pipelines - 1));

    Rng rng(seed);
    ScenarioTrace trace;
    trace.k = k;
    trace.metadata = {"generator=synthetic-ar1", "seed=" + std::to_string(seed)};
    trace.frames.reserve(n_frames);
    double z = gen.mu;
    for (std::size_t t = 0; t < n_frames; ++t) {
        if (t > 0) z = std::clamp(gen.alpha * z + (1 - gen.alpha) * gen.mu + gen.z_noise * rng.normal(), 0.0, 1.0);
        FrameRecord f;
        f.map_full = std::clamp(gen.base - gen.span * z + gen.map_noise * rng.normal(), 0.0, 1.0);
        for (const auto& [id, missing] : subsets) {
            const double loss = missing * (gen.degradation_base + gen.degradation_slope * z);
            f.map_partial[id] = std::clamp(f.map_full - loss, 0.0, f.map_full);
        }
        f.features.resize(k);
        for (std::size_t j = 0; j < k; ++j)
            f.features[j] = weight[j] * (2 * z - 1) + bias[j] + gen.feature_noise * rng.normal();
        trace.frames.push_back(std::move(f));
    }
    return trace;
}

namespace {

std::vector<std::string> expected_columns(std::size_t k, const SystemParams& params) {
    std::vector<std::string> cols;
    for (std::size_t j = 0; j < k; ++j) cols.push_back("f" + std::to_string(j));
    cols.push_back("map_full");
    for (const auto& key : partial_keys(params)) cols.push_back("map_" + key);
    return cols;
}

}  // namespace

std::string trace_to_csv(const ScenarioTrace& trace, const SystemParams& params) {
    trace.validate();
    const auto keys = partial_keys(params);
    std::string out;
    for (const auto& m : trace.metadata) out += "# " + m + "\n";
    out += join(expected_columns(trace.k, params)) + "\n";
    std::vector<std::string> row;
    for (const auto& f : trace.frames) {
        row.clear();
        for (const double x : f.features) row.push_back(fixed(x, 9));
        row.push_back(fixed(f.map_full, 9));
        for (const auto& key : keys) {
            const auto it = f.map_partial.find(key);
            if (it == f.map_partial.end()) throw TraceError("frame lacks partial-fusion entry " + key);
            row.push_back(fixed(it->second, 9));
        }
        out += join(row) + "\n";
    }
    return out;
}

ScenarioTrace parse_trace_csv(const std::string& text, const SystemParams& params, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    ScenarioTrace trace;
    std::vector<std::string> header;
    std::vector<std::string> keys;
    auto fail = [&](const std::string& msg) { throw TraceError(origin + ":" + std::to_string(line_no) + ": " + msg); };

    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        if (stripped[0] == '#') {
            if (header.empty()) trace.metadata.push_back(trim(stripped.substr(1)));
            continue;
        }
        // getline-based split keeps empty cells, which split_list would drop.
        std::vector<std::string> cells;
        std::stringstream ss(stripped);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (!stripped.empty() && stripped.back() == ',') cells.emplace_back();

        if (header.empty()) {
            header = cells;
            std::size_t k = 0;
            while (k < header.size() && header[k] == "f" + std::to_string(k)) ++k;
            const auto expected = expected_columns(k, params);
            if (k == 0 || header != expected)
                fail("bad header; expected columns: " + join(expected_columns(std::max<std::size_t>(k, 1), params)) +
                     " (features f0..f{k-1} first)");
            trace.k = k;
            keys = partial_keys(params);
            continue;
        }
        if (cells.size() != header.size())
            fail("row has " + std::to_string(cells.size()) + " columns, header has " + std::to_string(header.size()));
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::size_t used = 0;
            try {
                values[c] = std::stod(cells[c], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cells[c].size() || !std::isfinite(values[c]))
                fail("column " + header[c] + ": not a number: '" + cells[c] + "'");
        }
        FrameRecord f;
        f.features.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(trace.k));
        f.map_full = values[trace.k];
        if (!(f.map_full >= 0 && f.map_full <= 1)) fail("map_full = " + cells[trace.k] + " outside [0,1]");
        for (std::size_t s = 0; s < keys.size(); ++s) {
            const double v = values[trace.k + 1 + s];
            if (!(v >= 0 && v <= 1)) fail("map_" + keys[s] + " = " + cells[trace.k + 1 + s] + " outside [0,1]");
            f.map_partial[keys[s]] = v;
        }
        trace.frames.push_back(std::move(f));
    }
    if (header.empty()) throw TraceError(origin + ": missing header");
    if (trace.frames.empty()) throw TraceError(origin + ": trace has no frames");
    trace.validate();
    return trace;
}

ScenarioTrace load_trace(const std::string& path, const SystemParams& params) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::runtime_error& e) {
        throw TraceError(e.what());
    }
    return parse_trace_csv(text, params, path);
}

void save_trace(const std::string& path, const ScenarioTrace& trace, const SystemParams& params) {
    write_text_file(path, trace_to_csv(trace, params));
}

double realized_map(const FrameRecord& frame, const SystemParams& params, Action action, bool all_arrived) {
    if (!params.contains(action)) throw DomainError(action.name() + " is not in the action set");
    if (action.offloaded == 0 || all_arrived) return frame.map_full;
    const auto key = params.local_subset_id(action);
    const auto it = frame.map_partial.find(key);
    if (it == frame.map_partial.end()) throw DomainError("frame has no partial-fusion score for " + key);
    return it->second;
}

double map_full_quantile(const ScenarioTrace& trace, double q) {
    if (trace.frames.empty()) throw TraceError("trace has no frames");
    std::vector<double> v;
    v.reserve(trace.size());
    for (const auto& f : trace.frames) v.push_back(f.map_full);
    std::sort(v.begin(), v.end());
    const auto idx = static_cast<std::size_t>(std::floor(std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1)));
    return v[idx];
}

double mean_map_full(const ScenarioTrace& trace) {
    if (trace.frames.empty()) throw TraceError("trace has no frames");
    double s = 0;
    for (const auto& f : trace.frames) s += f.map_full;
    return s / static_cast<double>(trace.size());
}

}  // namespace offsim
