#include "tcqkd/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tcqkd {

namespace {

std::string channel_name(Channel c) {
    switch (c) {
        case Channel::KEY: return "KEY";
        case Channel::MZ_PLUS: return "MZ_PLUS";
        case Channel::MZ_MINUS: return "MZ_MINUS";
    }
    return "?";
}

Channel channel_from(const std::string& s, const std::string& where) {
    if (s == "KEY") return Channel::KEY;
    if (s == "MZ_PLUS") return Channel::MZ_PLUS;
    if (s == "MZ_MINUS") return Channel::MZ_MINUS;
    throw IoError(where + ": unknown channel '" + s + "'");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write file: " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open file: " + path);
    return is;
}

void expect_header(std::istream& is, const std::string& expected, const std::string& path) {
    std::string line;
    if (!std::getline(is, line)) throw IoError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected)
        throw IoError(path + ":1: expected header '" + expected + "', got '" + line + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

int64_t parse_i64(const std::string& s, const std::string& where) {
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(where + ": malformed integer '" + s + "'");
    }
}

double parse_f64(const std::string& s, const std::string& where) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(where + ": malformed number '" + s + "'");
    }
}

std::string loc(const std::string& path, size_t line) { return path + ":" + std::to_string(line); }

}  // namespace

void write_chronogram_csv(std::ostream& os, const std::vector<DetectionEvent>& events) {
    os << "sequence_id,channel,timestamp_ns\n";
    char buf[64];
    for (const auto& ev : events) {
        std::snprintf(buf, sizeof buf, "%" PRId64 ",%s,%.1f\n", ev.sequence_id,
                      channel_name(ev.channel).c_str(), ev.timestamp_ns);
        os << buf;
    }
}

void write_chronogram_csv(const std::string& path, const std::vector<DetectionEvent>& events) {
    auto os = open_out(path);
    write_chronogram_csv(os, events);
}

std::vector<DetectionEvent> read_chronogram_csv(const std::string& path) {
    auto is = open_in(path);
    expect_header(is, "sequence_id,channel,timestamp_ns", path);
    std::vector<DetectionEvent> events;
    std::string line;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 3) throw IoError(loc(path, lineno) + ": expected 3 fields");
        DetectionEvent ev;
        ev.sequence_id = parse_i64(f[0], loc(path, lineno));
        ev.channel = channel_from(f[1], loc(path, lineno));
        ev.timestamp_ns = parse_f64(f[2], loc(path, lineno));
        events.push_back(ev);
    }
    return events;
}

void write_truth_csv(std::ostream& os, const TruthRecord& truth) {
    os << "sequence_id,clock_index,symbol\n";
    char buf[64];
    for (size_t s = 0; s < truth.size(); ++s) {
        for (size_t k = 0; k < truth[s].size(); ++k) {
            std::snprintf(buf, sizeof buf, "%zu,%zu,%c\n", s, k, symbol_to_char(truth[s][k]));
            os << buf;
        }
    }
}

void write_truth_csv(const std::string& path, const TruthRecord& truth) {
    auto os = open_out(path);
    write_truth_csv(os, truth);
}

TruthRecord read_truth_csv(const std::string& path) {
    auto is = open_in(path);
    expect_header(is, "sequence_id,clock_index,symbol", path);
    TruthRecord truth;
    std::string line;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 3) throw IoError(loc(path, lineno) + ": expected 3 fields");
        const int64_t seq = parse_i64(f[0], loc(path, lineno));
        const int64_t clk = parse_i64(f[1], loc(path, lineno));
        if (f[2].size() != 1) throw IoError(loc(path, lineno) + ": symbol must be one character");
        if (seq < 0 || clk < 0) throw IoError(loc(path, lineno) + ": negative index");
        if (static_cast<size_t>(seq) >= truth.size()) truth.resize(static_cast<size_t>(seq) + 1);
        auto& row = truth[static_cast<size_t>(seq)];
        if (static_cast<size_t>(clk) != row.size())
            throw IoError(loc(path, lineno) + ": clock indices must be dense and in order");
        try {
            row.push_back(symbol_from_char(f[2][0]));
        } catch (const std::exception& e) {
            throw IoError(loc(path, lineno) + ": " + e.what());
        }
    }
    return truth;
}

void write_samples_csv(std::ostream& os, const std::vector<ContrastSample>& samples) {
    os << "sequence_id,n_plus,n_minus\n";
    char buf[96];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%" PRId64 ",%" PRId64 ",%" PRId64 "\n", s.sequence_id,
                      s.n_plus, s.n_minus);
        os << buf;
    }
}

void write_samples_csv(const std::string& path, const std::vector<ContrastSample>& samples) {
    auto os = open_out(path);
    write_samples_csv(os, samples);
}

std::vector<ContrastSample> read_samples_csv(const std::string& path) {
    auto is = open_in(path);
    expect_header(is, "sequence_id,n_plus,n_minus", path);
    std::vector<ContrastSample> samples;
    std::string line;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 3) throw IoError(loc(path, lineno) + ": expected 3 fields");
        ContrastSample s;
        s.sequence_id = parse_i64(f[0], loc(path, lineno));
        s.n_plus = parse_i64(f[1], loc(path, lineno));
        s.n_minus = parse_i64(f[2], loc(path, lineno));
        if (s.n_plus < 0 || s.n_minus < 0) throw IoError(loc(path, lineno) + ": negative count");
        samples.push_back(s);
    }
    return samples;
}

void write_curves_csv(std::ostream& os, const std::vector<SecurityCurve>& curves) {
    os << "q,i_ab,i_ae,dc\n";
    char buf[128];
    for (const auto& curve : curves) {
        for (const auto& pt : curve.points) {
            std::snprintf(buf, sizeof buf, "%.6f,%.9f,%.9f,%.6f\n", pt.q, pt.i_ab, pt.i_ae,
                          curve.dc);
            os << buf;
        }
    }
}

void write_curves_csv(const std::string& path, const std::vector<SecurityCurve>& curves) {
    auto os = open_out(path);
    write_curves_csv(os, curves);
}

void write_range_csv(std::ostream& os, const RangeProjection& proj) {
    os << "distance_km,expected_qber,secure\n";
    char buf[96];
    for (const auto& pt : proj.points) {
        std::snprintf(buf, sizeof buf, "%.3f,%.9f,%d\n", pt.distance_km, pt.expected_qber,
                      pt.secure ? 1 : 0);
        os << buf;
    }
}

void write_range_csv(const std::string& path, const RangeProjection& proj) {
    auto os = open_out(path);
    write_range_csv(os, proj);
}

namespace {

struct ConfigParser {
    ExperimentConfig cfg;
    std::string origin;

    void apply(const std::string& key, const std::string& value, size_t lineno) {
        const std::string where = loc(origin, lineno);
        if (key == "clock_period_ns") cfg.protocol.clock_period_ns = parse_f64(value, where);
        else if (key == "pulse_duration_ns") cfg.protocol.pulse_duration_ns = parse_f64(value, where);
        else if (key == "variant") {
            if (value == "two") cfg.protocol.variant = Variant::TwoState;
            else if (value == "four") cfg.protocol.variant = Variant::FourState;
            else throw IoError(where + ": variant must be 'two' or 'four'");
        } else if (key == "pattern") {
            if (value == "alternating") cfg.pattern = PatternKind::Alternating;
            else if (value == "random") cfg.pattern = PatternKind::Random;
            else if (value == "fixed0") { cfg.pattern = PatternKind::Fixed; cfg.fixed_bit = 0; }
            else if (value == "fixed1") { cfg.pattern = PatternKind::Fixed; cfg.fixed_bit = 1; }
            else throw IoError(where + ": pattern must be alternating|random|fixed0|fixed1");
        } else if (key == "shape") {
            if (value == "square") cfg.shape_kind = ShapeKind::Square;
            else if (value == "edged") cfg.shape_kind = ShapeKind::Edged;
            else if (value.rfind("csv:", 0) == 0) {
                cfg.shape_kind = ShapeKind::Csv;
                cfg.shape_csv_path = value.substr(4);
            } else throw IoError(where + ": shape must be square|edged|csv:PATH");
        } else if (key == "rise_ns") cfg.rise_ns = parse_f64(value, where);
        else if (key == "decay_ns") cfg.decay_ns = parse_f64(value, where);
        else if (key == "target_fwhm_ns") {
            if (value == "none") cfg.target_fwhm_ns.reset();
            else cfg.target_fwhm_ns = parse_f64(value, where);
        } else if (key == "mu") cfg.mu = parse_f64(value, where);
        else if (key == "transmission") cfg.transmission = parse_f64(value, where);
        else if (key == "n_sequences") cfg.n_sequences = parse_i64(value, where);
        else if (key == "sequence_duration_ms") cfg.sequence_duration_ms = parse_f64(value, where);
        else if (key == "key_efficiency") cfg.det_key.efficiency = parse_f64(value, where);
        else if (key == "mz_efficiency") cfg.det_mz.efficiency = parse_f64(value, where);
        else if (key == "jitter_sigma_ns") {
            cfg.det_key.jitter_sigma_ns = parse_f64(value, where);
            cfg.det_mz.jitter_sigma_ns = cfg.det_key.jitter_sigma_ns;
        } else if (key == "dark_rate_hz") {
            cfg.det_key.dark_rate_hz = parse_f64(value, where);
            cfg.det_mz.dark_rate_hz = cfg.det_key.dark_rate_hz;
        } else if (key == "resolution_ns") {
            cfg.det_key.resolution_ns = parse_f64(value, where);
            cfg.det_mz.resolution_ns = cfg.det_key.resolution_ns;
        } else if (key == "interferometer_delay_ns") {
            cfg.interferometer_delay_ns = parse_f64(value, where);
        } else if (key == "phase_mode") {
            if (value == "uniform") cfg.phase_mode = PhaseMode::UniformPerSequence;
            else if (value == "scan") cfg.phase_mode = PhaseMode::UniformScan;
            else if (value.rfind("fixed:", 0) == 0) {
                cfg.phase_mode = PhaseMode::Fixed;
                cfg.fixed_phase = parse_f64(value.substr(6), where);
            } else throw IoError(where + ": phase_mode must be uniform|scan|fixed:RADIANS");
        } else if (key == "attack") {
            if (value == "none") cfg.attack.reset();
            else {
                AttackStrategy s;
                std::string rest;
                if (value.rfind("guess:", 0) == 0) { s.ambiguous_action = AmbiguousAction::GuessResendFull; rest = value.substr(6); }
                else if (value.rfind("short:", 0) == 0) { s.ambiguous_action = AmbiguousAction::ResendShortSlot4; rest = value.substr(6); }
                else if (value.rfind("block:", 0) == 0) { s.ambiguous_action = AmbiguousAction::Block; rest = value.substr(6); }
                else throw IoError(where + ": attack must be none|guess:P|short:P|block:P");
                s.intercept_fraction = parse_f64(rest, where);
                cfg.attack = s;
            }
        } else if (key == "seed") {
            cfg.rng_seed = static_cast<uint64_t>(parse_i64(value, where));
        } else if (key == "propagation_delay_ns") cfg.propagation_delay_ns = parse_f64(value, where);
        else if (key == "slot_error_prob") cfg.slot_error_prob = parse_f64(value, where);
        else if (key == "scan_min_ns") cfg.scan_min_ns = parse_f64(value, where);
        else if (key == "scan_max_ns") cfg.scan_max_ns = parse_f64(value, where);
        else if (key == "scan_step_ns") cfg.scan_step_ns = parse_f64(value, where);
        else throw IoError(where + ": unknown config key '" + key + "'");
    }
};

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
    ConfigParser parser;
    parser.origin = origin;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw IoError(loc(origin, lineno) + ": expected 'key = value'");
        parser.apply(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)), lineno);
    }
    parser.cfg.validate();
    return parser.cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    auto is = open_in(path);
    return parse_config(is, path);
}

std::string report_to_json(const RunReport& rep) {
    nlohmann::json j;
    j["qber"] = {
        {"all_sequences", rep.qber_all},
        {"binomial_error", rep.qber_all_error},
        {"last_sequence", rep.qber_last},
        {"last_sequence_flagged", rep.qber_last_flagged},
        {"best_delay_ns", rep.best_delay_ns},
        {"n_correct", rep.sift_all.n_correct},
        {"n_wrong", rep.sift_all.n_wrong},
        {"n_ambiguous", rep.sift_all.n_ambiguous},
        {"n_out_of_window", rep.sift_all.n_out},
        {"flagged", rep.qber_flagged},
    };
    j["gamma"] = {
        {"gamma0", rep.gamma.gamma0},
        {"sigma_seq", rep.gamma.sigma_seq},
        {"sigma_total", rep.gamma.sigma_total},
        {"n_p", rep.gamma.n_p},
        {"n_s", rep.gamma.n_s},
        {"mean_c2", rep.gamma.mean_c2},
        {"mean_c", rep.gamma.mean_c},
        {"n_excluded", rep.gamma.n_excluded},
        {"clamped_low", rep.gamma.clamped_low},
        {"clamped_high", rep.gamma.clamped_high},
        {"gamma_3sigma", rep.gamma_3sigma},
        {"flagged", rep.gamma_flagged},
    };
    j["contrast_loss"] = {
        {"gamma_th", rep.gamma_th},
        {"dc_central", rep.dc_central},
        {"dc_3sigma", rep.dc_3sigma},
    };
    j["security"] = {
        {"i_ab", rep.i_ab},
        {"i_ae", rep.i_ae},
        {"advantage_bits_per_sifted_bit", rep.advantage_per_sifted},
        {"advantage_bits_per_detected_pulse", rep.advantage_per_pulse},
        {"max_secure_qber", rep.max_secure_qber_at_dc},
        {"dc_used", rep.dc_used},
        {"flagged", rep.security_flagged},
    };
    j["counts"] = {
        {"KEY", rep.counts_key},
        {"MZ_PLUS", rep.counts_mz_plus},
        {"MZ_MINUS", rep.counts_mz_minus},
    };
    j["flags"] = rep.flags;
    return j.dump(2) + "\n";
}

void write_report_json(const std::string& path, const RunReport& rep) {
    auto os = open_out(path);
    os << report_to_json(rep);
}

}  // namespace tcqkd
