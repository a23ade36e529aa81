#include "noisebench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "noisebench/rng.hpp"

namespace fs = std::filesystem;

namespace noisebench::data {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto begin = f.find_first_not_of(" \t");
        const auto end = f.find_last_not_of(" \t");
        f = begin == std::string::npos ? "" : f.substr(begin, end - begin + 1);
    }
    return fields;
}

std::vector<double> read_signal_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open signal file " + path.string());
    }
    std::vector<double> samples;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto begin = line.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        std::size_t pos = 0;
        double value = 0.0;
        try {
            value = std::stod(line, &pos);
        } catch (const std::exception&) {
            throw std::runtime_error("signal file " + path.string() + " line " +
                                     std::to_string(line_no) + ": cannot parse '" + line + "'");
        }
        if (!std::isfinite(value)) {
            throw std::runtime_error("signal file " + path.string() + " line " +
                                     std::to_string(line_no) + ": non-finite sample '" + line + "'");
        }
        samples.push_back(value);
    }
    return samples;
}

}  // namespace

Dataset load_dataset(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw std::runtime_error("cannot open manifest " + manifest_path);
    }
    const fs::path base_dir = fs::path(manifest_path).parent_path();

    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("manifest " + manifest_path + ": empty file");
    }
    const auto header = split_csv_line(line);
    const std::vector<std::string> expected = {"id", "label", "sampling_rate_hz", "path"};
    if (header != expected) {
        throw std::runtime_error("manifest " + manifest_path +
                                 ": header must be 'id,label,sampling_rate_hz,path'");
    }

    Dataset dataset;
    std::map<std::string, int> label_index;
    int row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        const std::string where = "manifest " + manifest_path + " row " + std::to_string(row_no);
        if (fields.size() != 4) {
            throw std::runtime_error(where + ": expected 4 fields, got " +
                                     std::to_string(fields.size()));
        }
        const std::string& id = fields[0];
        const std::string& label_name = fields[1];
        if (id.empty()) throw std::runtime_error(where + ": empty id");
        if (label_name.empty()) throw std::runtime_error(where + ": empty label");

        double rate = 0.0;
        try {
            rate = std::stod(fields[2]);
        } catch (const std::exception&) {
            throw std::runtime_error(where + ": bad sampling rate '" + fields[2] + "'");
        }
        if (!(rate > 0.0) || !std::isfinite(rate)) {
            throw std::runtime_error(where + ": sampling rate must be positive, got '" +
                                     fields[2] + "'");
        }
        if (fields[3].empty()) throw std::runtime_error(where + ": empty signal path");

        SignalRecord record;
        record.id = id;
        record.sampling_rate_hz = rate;
        record.samples = read_signal_file(base_dir / fields[3]);
        if (record.samples.empty()) {
            throw std::runtime_error(where + ": signal file " + fields[3] + " holds no samples");
        }

        auto [it, inserted] = label_index.try_emplace(label_name,
                                                      static_cast<int>(dataset.class_names.size()));
        if (inserted) dataset.class_names.push_back(label_name);
        record.label = ClassLabel{it->second, label_name};
        dataset.records.push_back(std::move(record));
    }
    if (dataset.records.empty()) {
        throw std::runtime_error("manifest " + manifest_path + ": empty dataset");
    }
    return dataset;
}

std::string write_dataset(const Dataset& dataset, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    const fs::path manifest_path = dir / "manifest.csv";
    std::ofstream manifest(manifest_path);
    if (!manifest) {
        throw std::runtime_error("cannot write " + manifest_path.string());
    }
    manifest << "id,label,sampling_rate_hz,path\n";
    for (const auto& record : dataset.records) {
        const std::string file_name = record.id + ".txt";
        std::ofstream signal(dir / file_name);
        if (!signal) {
            throw std::runtime_error("cannot write " + (dir / file_name).string());
        }
        char buf[64];
        for (double x : record.samples) {
            std::snprintf(buf, sizeof(buf), "%.17g\n", x);
            signal << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", record.sampling_rate_hz);
        manifest << record.id << ',' << record.label.name << ',' << buf << ',' << file_name << '\n';
    }
    return manifest_path.string();
}

Dataset synth_dataset(int classes, int records_per_class, int record_length, std::uint64_t seed) {
    if (classes < 2) throw std::invalid_argument("synth_dataset: classes must be >= 2");
    if (records_per_class < 1) throw std::invalid_argument("synth_dataset: records_per_class must be >= 1");
    if (record_length < 64) throw std::invalid_argument("synth_dataset: record_length must be >= 64");

    Dataset dataset;
    dataset.class_names.reserve(classes);
    for (int c = 0; c < classes; ++c) {
        dataset.class_names.push_back("class" + std::to_string(c));
    }

    for (int c = 0; c < classes; ++c) {
        // per-class wavelet shape: rate, width, polarity and timing jitter
        const double period = std::max(20.0, 64.0 - 10.0 * c);
        const double width = 3.0 + 3.0 * c;
        const double amplitude = (c % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.05 * c);
        const double jitter_std = 0.5 + 0.3 * c;

        for (int r = 0; r < records_per_class; ++r) {
            Rng rng(seed_combine(seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r)));
            std::vector<double> samples(record_length, 0.0);
            const double reach = 4.0 * width;
            for (double center = 0.0; center < record_length + reach; center += period) {
                const double jc = center + jitter_std * rng.next_gaussian();
                const int lo = std::max(0, static_cast<int>(std::floor(jc - reach)));
                const int hi = std::min(record_length - 1, static_cast<int>(std::ceil(jc + reach)));
                for (int i = lo; i <= hi; ++i) {
                    const double z = (static_cast<double>(i) - jc) / width;
                    samples[i] += amplitude * std::exp(-0.5 * z * z);
                }
            }
            for (double& x : samples) x += 0.02 * rng.next_gaussian();

            const double target_std = 100.0 + 15.0 * (2.0 * rng.next_double() - 1.0);
            const double scale = target_std / std_of(samples);
            for (double& x : samples) x *= scale;

            char id[32];
            std::snprintf(id, sizeof(id), "c%d_r%03d", c, r);
            dataset.records.push_back(SignalRecord{
                id, std::move(samples), 300.0, ClassLabel{c, dataset.class_names[c]}});
        }
    }
    return dataset;
}

Split split(const std::vector<SignalRecord>& records, const SplitSpec& spec) {
    const double fraction_sum = spec.train_fraction + spec.val_fraction + spec.test_fraction;
    if (std::abs(fraction_sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split: fractions must sum to 1");
    }
    for (double f : {spec.train_fraction, spec.val_fraction, spec.test_fraction}) {
        if (!(f > 0.0 && f < 1.0)) {
            throw std::invalid_argument("split: each fraction must lie in (0,1)");
        }
    }

    // group record indices per class, input order preserved
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < records.size(); ++i) {
        by_class[records[i].label.index].push_back(i);
    }
    for (const auto& [cls, idx] : by_class) {
        if (idx.size() < 3) {
            throw std::invalid_argument("split: class index " + std::to_string(cls) +
                                        " has only " + std::to_string(idx.size()) +
                                        " records, need at least 3");
        }
    }

    const double fractions[3] = {spec.train_fraction, spec.val_fraction, spec.test_fraction};
    std::vector<int> assignment(records.size(), -1);  // 0 train, 1 val, 2 test

    for (const auto& [cls, idx] : by_class) {
        const std::size_t n = idx.size();

        // largest-remainder rounding of n * fraction
        std::size_t counts[3];
        double remainders[3];
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double exact = static_cast<double>(n) * fractions[s];
            counts[s] = static_cast<std::size_t>(std::floor(exact + 1e-12));
            remainders[s] = exact - static_cast<double>(counts[s]);
            assigned += counts[s];
        }
        int order[3] = {0, 1, 2};
        std::sort(order, order + 3, [&](int a, int b) {
            if (remainders[a] != remainders[b]) return remainders[a] > remainders[b];
            return a < b;
        });
        for (std::size_t extra = 0; extra < n - assigned; ++extra) {
            ++counts[order[extra % 3]];
        }
        // every part keeps at least one record of every class
        for (int s = 0; s < 3; ++s) {
            while (counts[s] == 0) {
                int donor = 0;
                for (int d = 1; d < 3; ++d) {
                    if (counts[d] > counts[donor]) donor = d;
                }
                --counts[donor];
                ++counts[s];
            }
        }

        std::vector<std::size_t> shuffled = idx;
        Rng rng(seed_combine(spec.seed, static_cast<std::uint64_t>(cls)));
        rng.shuffle(shuffled);
        std::size_t pos = 0;
        for (int s = 0; s < 3; ++s) {
            for (std::size_t j = 0; j < counts[s]; ++j, ++pos) {
                assignment[shuffled[pos]] = s;
            }
        }
    }

    Split result;
    for (std::size_t i = 0; i < records.size(); ++i) {
        switch (assignment[i]) {
            case 0: result.train.push_back(records[i]); break;
            case 1: result.val.push_back(records[i]); break;
            default: result.test.push_back(records[i]); break;
        }
    }
    return result;
}

std::vector<Window> window(const SignalRecord& record, int length, int stride) {
    if (length < 1) throw std::invalid_argument("window: length must be >= 1");
    if (stride < 1) throw std::invalid_argument("window: stride must be >= 1");

    const int n = static_cast<int>(record.samples.size());
    std::vector<Window> windows;
    if (n < length) {
        // short record: single window, zero-padded at the tail
        Window w;
        w.values.assign(length, 0.0);
        std::copy(record.samples.begin(), record.samples.end(), w.values.begin());
        w.label = record.label;
        w.source_id = record.id;
        windows.push_back(std::move(w));
        return windows;
    }
    const int count = (n - length) / stride + 1;
    windows.reserve(count);
    for (int k = 0; k < count; ++k) {
        const int offset = k * stride;
        Window w;
        w.values.assign(record.samples.begin() + offset, record.samples.begin() + offset + length);
        w.label = record.label;
        w.source_id = record.id;
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<Window> window_all(const std::vector<SignalRecord>& records, int length, int stride) {
    std::vector<Window> all;
    for (const auto& record : records) {
        auto ws = window(record, length, stride);
        all.insert(all.end(), std::make_move_iterator(ws.begin()), std::make_move_iterator(ws.end()));
    }
    return all;
}

Window standardize(const Window& w) {
    Window out = w;
    const double m = mean_of(w.values);
    const double s = std_of(w.values);
    if (s < 1e-12) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    for (double& x : out.values) x = (x - m) / s;
    return out;
}

std::vector<Window> standardize_all(const std::vector<Window>& windows) {
    std::vector<Window> out;
    out.reserve(windows.size());
    for (const auto& w : windows) out.push_back(standardize(w));
    return out;
}

}  // namespace noisebench::data
