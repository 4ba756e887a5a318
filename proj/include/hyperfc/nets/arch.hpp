// Architecture tags and the flat parameter layout they induce.
#pragma once

#include <cstddef>
#include <regex>
#include <string>
#include <vector>

#include "hyperfc/core/error.hpp"

namespace hyperfc {

enum class ArchKind { MLP, FiLM, LoRA };

struct ArchSpec {
    ArchKind kind = ArchKind::MLP;
    int rank = 16;              // LoRA only
    bool hyper_critic = false;  // critic hidden layers adapted by the hypernetwork
    int state_dim = 34;
    int fail_dim = 6;
    int action_dim = 4;
    int hidden = 64;
    int hyper_hidden = 32;

    bool hyper() const { return kind != ArchKind::MLP; }

    /// Adaptation values one hidden layer consumes.
    int adapt_per_layer() const {
        switch (kind) {
            case ArchKind::FiLM: return 2 * hidden;
            case ArchKind::LoRA: return rank;
            case ArchKind::MLP: return 0;
        }
        return 0;
    }

    int actor_adapt_dim() const { return 2 * adapt_per_layer(); }
    int critic_adapt_dim() const { return hyper_critic ? 2 * adapt_per_layer() : 0; }
    int hyper_out() const { return actor_adapt_dim() + critic_adapt_dim(); }

    int actor_input() const { return hyper() ? state_dim : state_dim + fail_dim; }
    int critic_input() const { return hyper_critic ? state_dim : state_dim + fail_dim; }

    std::string tag() const {
        std::string t;
        switch (kind) {
            case ArchKind::MLP: return "MLP";
            case ArchKind::FiLM: t = "FiLM"; break;
            case ArchKind::LoRA: t = "LoRA(" + std::to_string(rank) + ")"; break;
        }
        return hyper_critic ? t + "+HC" : t;
    }

    void validate() const {
        if (state_dim <= 0 || fail_dim <= 0 || action_dim <= 0 || hidden <= 0 || hyper_hidden <= 0)
            throw ConfigError("network dimensions must be positive");
        if (kind == ArchKind::LoRA && rank <= 0) throw ConfigError("LoRA rank must be positive");
        if (kind == ArchKind::MLP && hyper_critic) throw ConfigError("MLP has no hypernetwork to condition the critic");
    }

    static ArchSpec parse(const std::string& tag) {
        static const std::regex re(R"(^(MLP|FiLM|LoRA\((\d+)\))(\+HC)?$)");
        std::smatch m;
        if (!std::regex_match(tag, m, re)) throw ConfigError("unknown architecture tag '" + tag + "'");
        ArchSpec s;
        const std::string base = m[1].str();
        if (base == "MLP") s.kind = ArchKind::MLP;
        else if (base == "FiLM") s.kind = ArchKind::FiLM;
        else {
            s.kind = ArchKind::LoRA;
            s.rank = std::stoi(m[2].str());
        }
        s.hyper_critic = m[3].matched;
        s.validate();
        return s;
    }
};

/// One named tensor inside the flat parameter vector, stored row-major.
struct TensorInfo {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::size_t offset = 0;

    std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

class ParamLayout {
public:
    int add(const std::string& name, int rows, int cols) {
        tensors_.push_back({name, rows, cols, total_});
        total_ += tensors_.back().size();
        return static_cast<int>(tensors_.size()) - 1;
    }

    const TensorInfo& operator[](int i) const { return tensors_.at(static_cast<std::size_t>(i)); }
    const std::vector<TensorInfo>& tensors() const { return tensors_; }
    std::size_t total() const { return total_; }

private:
    std::vector<TensorInfo> tensors_;
    std::size_t total_ = 0;
};

}  // namespace hyperfc
