#ifndef NETCLASS_TESTS_TAINT_AUDIT_HPP
#define NETCLASS_TESTS_TAINT_AUDIT_HPP

#include "netclass/protocol.hpp"

#include <memory>
#include <string>
#include <vector>

/// Tracks the active (train, test) pair and phase, and records any read of the
/// active test cohort outside the scoring phase.
class TaintAudit : public netclass::ProtocolObserver {
public:
    class Monitor : public netclass::ReadMonitor {
    public:
        Monitor(TaintAudit& audit, std::string id) : audit_(audit), id_(std::move(id)) {}
        void on_read(std::string_view) override { audit_.record(id_); }

    private:
        TaintAudit& audit_;
        std::string id_;
    };

    void on_pair(const std::string&, const std::string& test) override {
        test_ = test;
        phase_ = netclass::Phase::Preparation;
    }
    void on_phase(netclass::Phase phase) override { phase_ = phase; }

    void record(const std::string& id) {
        if (id != test_) return;
        if (phase_ == netclass::Phase::FinalScoring) {
            ++scoring_reads;
        } else {
            ++violations;
        }
    }

    std::vector<netclass::NamedDataset> wrap(const std::vector<netclass::NamedDataset>& cohorts) {
        std::vector<netclass::NamedDataset> out;
        for (const auto& c : cohorts) {
            out.push_back({c.id, c.data.with_monitor(std::make_shared<Monitor>(*this, c.id))});
        }
        return out;
    }

    std::size_t violations = 0;
    std::size_t scoring_reads = 0;

private:
    std::string test_;
    netclass::Phase phase_ = netclass::Phase::Preparation;
};

#endif
