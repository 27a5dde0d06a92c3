//! Closed object-class vocabulary, synonyms, and class-name helpers.

/// Every object class a scene may contain. Sorted, snake_case.
pub const OBJECT_CLASSES: &[&str] = &[
    "backpack",
    "bag",
    "basket",
    "bathtub",
    "bed",
    "bench",
    "bicycle",
    "blanket",
    "board",
    "book",
    "bookshelf",
    "bottle",
    "box",
    "bucket",
    "cabinet",
    "ceiling_light",
    "chair",
    "clock",
    "computer_tower",
    "counter",
    "cup",
    "curtain",
    "cushion",
    "desk",
    "dishwasher",
    "door",
    "dresser",
    "fan",
    "fireplace",
    "heater",
    "kettle",
    "keyboard",
    "lamp",
    "laptop",
    "microwave",
    "mirror",
    "nightstand",
    "oven",
    "painting",
    "piano",
    "pillow",
    "plant",
    "printer",
    "radiator",
    "refrigerator",
    "rug",
    "shelf",
    "shoes",
    "shower",
    "sink",
    "sofa",
    "speaker",
    "stool",
    "stove",
    "suitcase",
    "table",
    "telephone",
    "toilet",
    "towel",
    "trash_can",
    "tv_monitor",
    "washer",
    "whiteboard",
    "window",
];

/// Colloquial term to canonical class. Keys are normalized.
pub const SYNONYMS: &[(&str, &str)] = &[
    ("armchair", "chair"),
    ("bedside_table", "nightstand"),
    ("bin", "trash_can"),
    ("bookcase", "bookshelf"),
    ("carpet", "rug"),
    ("cooker", "stove"),
    ("couch", "sofa"),
    ("cupboard", "cabinet"),
    ("display", "tv_monitor"),
    ("fridge", "refrigerator"),
    ("garbage_can", "trash_can"),
    ("houseplant", "plant"),
    ("light", "ceiling_light"),
    ("monitor", "tv_monitor"),
    ("night_stand", "nightstand"),
    ("picture", "painting"),
    ("potted_plant", "plant"),
    ("screen", "tv_monitor"),
    ("settee", "sofa"),
    ("stovetop", "stove"),
    ("television", "tv_monitor"),
    ("trash_bin", "trash_can"),
    ("tv", "tv_monitor"),
    ("washing_machine", "washer"),
];

pub fn is_known_class(label: &str) -> bool {
    OBJECT_CLASSES.binary_search(&label).is_ok()
}

/// Lowercases and folds every run of non-alphanumerics into one `_`.
pub fn normalize_term(term: &str) -> String {
    let mut out = String::with_capacity(term.len());
    let mut pending_sep = false;
    for c in term.trim().chars() {
        if c.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.extend(c.to_lowercase());
        } else {
            pending_sep = true;
        }
    }
    out
}

pub fn synonym_of(normalized: &str) -> Option<&'static str> {
    SYNONYMS
        .binary_search_by(|(k, _)| k.cmp(&normalized))
        .ok()
        .map(|i| SYNONYMS[i].1)
}

/// `tv_monitor` -> `Tv Monitor`, the prefix of auto-assigned node ids.
pub fn title_case(label: &str) -> String {
    label
        .split('_')
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut cs = w.chars();
            match cs.next() {
                Some(first) => first.to_uppercase().chain(cs).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// `tv_monitor` -> `tv monitor`, as used in question text.
pub fn display_name(label: &str) -> String {
    label.replace('_', " ")
}
