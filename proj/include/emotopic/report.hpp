#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coherence.hpp"
#include "error.hpp"
#include "framework.hpp"
#include "stats.hpp"
#include "tsv.hpp"

namespace emotopic {

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

// Left-closed, right-open bins of the given width, aligned to multiples of
// the width and spanning the data range.
inline std::vector<HistogramBin> histogram(const std::vector<double>& values, double bin_width) {
    if (!(bin_width > 0)) throw ConfigError("bin_width must be > 0");
    if (values.empty()) return {};
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double start = std::floor(*mn / bin_width) * bin_width;
    auto index = [&](double v) {
        auto k = static_cast<std::ptrdiff_t>(std::floor((v - start) / bin_width));
        return static_cast<std::size_t>(std::max<std::ptrdiff_t>(k, 0));
    };
    std::vector<HistogramBin> bins(index(*mx) + 1);
    for (std::size_t k = 0; k < bins.size(); ++k) {
        bins[k].lo = start + static_cast<double>(k) * bin_width;
        bins[k].hi = start + static_cast<double>(k + 1) * bin_width;
    }
    for (double v : values) ++bins[index(v)].count;
    return bins;
}

struct TopicRow {
    int topic = 0;
    std::string theme;
    std::optional<MhealthDomain> domain;
    std::size_t n_reviews = 0;
    std::vector<std::string> top_terms;
};

struct DomainRow {
    MhealthDomain domain{};
    std::size_t n_reviews = 0;
    std::optional<SignificanceResult> valence;
};

struct ReportBundle {
    std::optional<std::vector<TopicRow>> topic_table;
    std::optional<std::vector<TopicStats>> topic_stats;  // valence and activation tables derive from this
    std::optional<std::vector<DomainRow>> domain_table;
    std::optional<HypothesisReport> hypotheses;
    std::optional<std::vector<HistogramBin>> histogram;
    std::optional<std::vector<CurvePoint>> coherence_curve;
    std::map<int, std::string> themes;  // topic -> theme for labelling

    std::vector<std::string> missing_sections() const {
        std::vector<std::string> m;
        if (!topic_table) m.push_back("topics");
        if (!topic_stats) m.push_back("topic_stats");
        if (!domain_table) m.push_back("domains");
        if (!hypotheses) m.push_back("hypotheses");
        if (!histogram) m.push_back("histogram");
        if (!coherence_curve) m.push_back("coherence_curve");
        return m;
    }
};

enum class ReportFormat { tsv, markdown };

// Means with three decimals; p-values below 0.001 as "<0.001".
inline std::string format_mean(double v) { return tsv::fixed(v, 3); }
inline std::string format_p(double p) { return p < 0.001 ? "<0.001" : tsv::fixed(p, 3); }

namespace detail {

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    std::string render(ReportFormat f) const {
        std::ostringstream out;
        if (f == ReportFormat::tsv) {
            out << tsv::join(header_) << '\n';
            for (const auto& r : rows_) {
                std::vector<std::string> esc;
                for (const auto& c : r) esc.push_back(tsv::escape(c));
                out << tsv::join(esc) << '\n';
            }
            return out.str();
        }
        auto line = [&](const std::vector<std::string>& cells) {
            out << '|';
            for (const auto& c : cells) {
                std::string s = c;
                for (std::size_t p = 0; (p = s.find('|', p)) != std::string::npos; p += 2) s.replace(p, 1, "\\|");
                out << ' ' << s << " |";
            }
            out << '\n';
        };
        line(header_);
        out << '|';
        for (std::size_t i = 0; i < header_.size(); ++i) out << " --- |";
        out << '\n';
        for (const auto& r : rows_) line(r);
        return out.str();
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline std::string domain_label(const std::optional<MhealthDomain>& d) {
    return d ? std::string(domain_name(*d)) : std::string("-");
}

} // namespace detail

// Renders every section into memory. Keys are file names relative to the
// report directory.
inline std::map<std::string, std::string> render_to_strings(const ReportBundle& b, ReportFormat f) {
    if (auto missing = b.missing_sections(); !missing.empty()) {
        std::string msg = "report bundle incomplete, missing:";
        for (const auto& s : missing) msg += " " + s;
        throw DependencyError(msg);
    }
    std::size_t n_hist = 0;
    for (const auto& bin : *b.histogram) n_hist += bin.count;
    if (n_hist == 0) throw ValidationError("report: empty corpus, nothing to render");

    const std::string ext = f == ReportFormat::tsv ? ".tsv" : ".md";
    std::map<std::string, std::string> files;
    auto theme_of = [&](int topic) {
        auto it = b.themes.find(topic);
        return it == b.themes.end() || it->second.empty() ? "Topic " + std::to_string(topic) : it->second;
    };

    detail::Table topics({"topic", "theme", "domain", "n", "top_terms"});
    for (const auto& r : *b.topic_table)
        topics.add({std::to_string(r.topic), r.theme, detail::domain_label(r.domain), std::to_string(r.n_reviews),
                    tsv::join(r.top_terms, ' ')});
    files["topics" + ext] = topics.render(f);

    auto ranked = *b.topic_stats;
    sort_by_valence(ranked);
    detail::Table valence({"topic", "theme", "domain", "valence", "activation", "p_valence_corrected"});
    for (const auto& s : ranked)
        valence.add({std::to_string(s.topic), theme_of(s.topic), detail::domain_label(s.domain),
                     format_mean(s.valence.mean), format_mean(s.activation.mean), format_p(s.valence.p_corrected)});
    files["valence" + ext] = valence.render(f);

    detail::Table domains({"domain", "n", "valence_mean", "p"});
    for (const auto& d : *b.domain_table)
        domains.add({std::string(domain_name(d.domain)), std::to_string(d.n_reviews),
                     d.valence ? format_mean(d.valence->mean) : "-", d.valence ? format_p(d.valence->p_corrected) : "-"});
    files["domains" + ext] = domains.render(f);

    detail::Table activation({"domain", "topic", "theme", "activation", "p"});
    for (const auto& s : *b.topic_stats)
        if (s.activation.significant)
            activation.add({detail::domain_label(s.domain), std::to_string(s.topic), theme_of(s.topic),
                            format_mean(s.activation.mean), format_p(s.activation.p_corrected)});
    files["activation" + ext] = activation.render(f);

    detail::Table hyp({"hypothesis", "component", "result"});
    hyp.add({"H1a", "Emotion generation", to_string(b.hypotheses->h1a.verdict)});
    hyp.add({"H1b", "Emotion generation", to_string(b.hypotheses->h1b.verdict)});
    hyp.add({"H2", "Emotion regulation", to_string(b.hypotheses->h2.verdict)});
    files["hypotheses" + ext] = hyp.render(f);

    std::ostringstream hist;
    hist << "bin_lo\tbin_hi\tcount\n";
    for (const auto& bin : *b.histogram)
        hist << tsv::format_double(bin.lo) << '\t' << tsv::format_double(bin.hi) << '\t' << bin.count << '\n';
    files["fig5_histogram.tsv"] = hist.str();

    std::ostringstream curve;
    curve << "topic_count\tnpmi\tdiversity\n";
    for (const auto& p : *b.coherence_curve)
        curve << p.topic_count << '\t' << tsv::format_double(p.npmi) << '\t' << tsv::format_double(p.diversity) << '\n';
    files["fig3_curve.tsv"] = curve.str();
    return files;
}

// Writes the rendered files under `dir`. Nothing is written unless the whole
// bundle renders.
inline std::vector<std::filesystem::path> render(const ReportBundle& b, ReportFormat f,
                                                 const std::filesystem::path& dir) {
    const auto files = render_to_strings(b, f);
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const auto& [name, content] : files) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write report file: " + path.string());
        out << content;
        written.push_back(path);
    }
    return written;
}

} // namespace emotopic
