#include "chaoscomm/metrics.hpp"

#include <cmath>

namespace chaoscomm {

namespace {
constexpr double kLn2 = 0.69314718055994530941723212145818;

double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }
} // namespace

ConfusionTable::ConfusionTable(int n_symbols) : n_(n_symbols) {
    if (n_symbols < 2)
        throw DomainError("confusion table needs an alphabet of at least two symbols");
    counts_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0);
}

void ConfusionTable::add(int sent, int decoded) {
    if (sent < 0 || sent >= n_ || decoded < 0 || decoded >= n_)
        throw DomainError("symbol outside the table alphabet");
    ++counts_[static_cast<std::size_t>(sent) * static_cast<std::size_t>(n_) +
              static_cast<std::size_t>(decoded)];
    ++total_;
}

long ConfusionTable::count(int sent, int decoded) const {
    if (sent < 0 || sent >= n_ || decoded < 0 || decoded >= n_)
        throw DomainError("symbol outside the table alphabet");
    return counts_[static_cast<std::size_t>(sent) * static_cast<std::size_t>(n_) +
                   static_cast<std::size_t>(decoded)];
}

double mutual_information(const ConfusionTable& table) {
    if (table.total() == 0)
        throw EmptyTable("mutual information of an empty table");
    const double total = static_cast<double>(table.total());
    const int n = table.alphabet();
    double mi = 0.0;
    std::vector<double> p_sent(static_cast<std::size_t>(n), 0.0);
    std::vector<double> p_dec(static_cast<std::size_t>(n), 0.0);
    for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) {
            const double p = static_cast<double>(table.count(b, d)) / total;
            p_sent[static_cast<std::size_t>(b)] += p;
            p_dec[static_cast<std::size_t>(d)] += p;
        }
    for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) {
            const double p = static_cast<double>(table.count(b, d)) / total;
            if (p > 0.0)
                mi += p * std::log2(p / (p_sent[static_cast<std::size_t>(b)] *
                                         p_dec[static_cast<std::size_t>(d)]));
        }
    return mi;
}

double sent_entropy(const ConfusionTable& table) {
    if (table.total() == 0)
        throw EmptyTable("entropy of an empty table");
    const double total = static_cast<double>(table.total());
    double h = 0.0;
    for (int b = 0; b < table.alphabet(); ++b) {
        double p = 0.0;
        for (int d = 0; d < table.alphabet(); ++d)
            p += static_cast<double>(table.count(b, d)) / total;
        h -= xlog2x(p);
    }
    return h;
}

double decoded_entropy(const ConfusionTable& table) {
    if (table.total() == 0)
        throw EmptyTable("entropy of an empty table");
    const double total = static_cast<double>(table.total());
    double h = 0.0;
    for (int d = 0; d < table.alphabet(); ++d) {
        double p = 0.0;
        for (int b = 0; b < table.alphabet(); ++b)
            p += static_cast<double>(table.count(b, d)) / total;
        h -= xlog2x(p);
    }
    return h;
}

double shannon_capacity(double snr_db) {
    return 0.5 * std::log2(1.0 + std::pow(10.0, snr_db / 10.0));
}

double encoding_capacity(const std::vector<UserRate>& users) {
    double acc = 0.0;
    for (const UserRate& u : users) {
        if (u.freq_multiplier < 1 || !(u.beta_base > 0.0))
            throw DomainError("invalid user rate parameters");
        acc += static_cast<double>(u.freq_multiplier) * u.beta_base;
    }
    return acc;
}

double encoding_capacity_bits_per_period(const std::vector<UserRate>& users) {
    return encoding_capacity(users) / kLn2;
}

double ber(const std::vector<std::uint8_t>& error_mask) {
    if (error_mask.empty())
        throw DomainError("empty error mask");
    long errors = 0;
    for (auto e : error_mask)
        errors += e ? 1 : 0;
    return static_cast<double>(errors) / static_cast<double>(error_mask.size());
}

} // namespace chaoscomm
