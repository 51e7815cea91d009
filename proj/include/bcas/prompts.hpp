#pragma once

#include <map>
#include <string>
#include <string_view>

namespace bcas {

/// Returns the text of a versioned prompt template. Throws UnknownTemplate.
/// Templates are shared across all model backends; ids are "<name>/v<N>".
std::string_view prompt_template(std::string_view id);

/// Substitutes {name} placeholders. Unknown placeholders are left verbatim.
std::string render_template(std::string_view tpl,
                            const std::map<std::string, std::string, std::less<>>& values);

} // namespace bcas
