// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "intentforge/catalog.hpp"
#include "intentforge/cocreation/reasoner.hpp"

namespace intentforge::cocreation {

struct Verdict {
    bool allowed = true;
    /// G1..G5 when vetoed.
    std::string rule;
    std::string detail;

    static Verdict allow() { return {}; }
    static Verdict veto(std::string rule, std::string detail) { return {false, std::move(rule), std::move(detail)}; }
};

/// Names presented as orderable: the explicit list plus bulleted lines that carry a price.
std::vector<std::string> recommended_names(const TextReply& reply);

/// True when the text contains a euro amount ("7100.00 EUR", "€300", "50 euros").
bool contains_money(std::string_view text);

/// The amount following the word "total", if any.
std::optional<Money> extract_total(std::string_view text);

/// Offering ids returned by successful catalog tool calls so far.
std::vector<std::string> catalog_grounded_ids(const Session& session);

/// Rules run in order G1..G5; the first hit wins.
Verdict check_guardrails(const Session& session, const Effect& effect, const CatalogGraph& graph);

/// Plain-language explanation used for the corrective agent turn.
std::string corrective_text(const Verdict& v);

}  // namespace intentforge::cocreation
