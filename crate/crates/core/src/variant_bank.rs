//! Fixed paraphrase template banks for question variants, one bank per
//! question subtype. Type I templates carry a `{label}` placeholder.

use crate::qa::QuestionType;

pub(crate) const TYPE1: [&str; 12] = [
    "Can you hear a {label} anywhere in this clip?",
    "Does the scene contain the sound of a {label}?",
    "Is a {label} audible in this recording?",
    "Do you detect a {label} in this audio scene?",
    "Is the sound of a {label} present in the clip?",
    "Would you say a {label} occurs in this scene?",
    "Does this clip include a {label} sound event?",
    "Is there any {label} to be heard in the scene?",
    "Can a {label} be detected in this recording?",
    "Does the audio contain a {label} event?",
    "Is a {label} among the sounds in this clip?",
    "Do we hear a {label} at any point in the scene?",
];

const TYPE2_ACTIVE: [&str; 12] = [
    "What sound events are present in the clip?",
    "List all the sound sources you can hear.",
    "Which sound events occur in this scene?",
    "Name every active sound source in the recording.",
    "What sounds are audible in this clip?",
    "Identify all sound events present in the scene.",
    "Which sources produce sound in this recording?",
    "What are the active sound events here?",
    "Enumerate the sound sources active in the clip.",
    "What do you hear in this audio scene?",
    "List the sound events detected in this recording.",
    "Which audio events are present in the scene?",
];

const STATIONARY: [&str; 12] = [
    "Which sound sources stay in one place in this clip?",
    "List all sound events that do not move.",
    "What sounds keep a fixed position in the scene?",
    "Identify the sound sources that remain still.",
    "Which audio events hold their position throughout?",
    "Name the sound events that are not moving.",
    "What sound sources are fixed in place in this recording?",
    "Which sounds remain at the same location in the scene?",
    "List the stationary sound sources in the clip.",
    "Which sound events show no movement?",
    "What sources stay put for the duration of the clip?",
    "Identify all non-moving sound events in the scene.",
];

const MOVING: [&str; 12] = [
    "Which sound sources change position in this clip?",
    "List all sound events that move.",
    "What sounds travel through the scene?",
    "Identify the sound sources that are in motion.",
    "Which audio events shift their location over time?",
    "Name the sound events that do not stay still.",
    "What sound sources move around in this recording?",
    "Which sounds change location during the clip?",
    "List the moving sound sources in the scene.",
    "Which sound events show movement?",
    "What sources wander during the clip?",
    "Identify all moving sound events in the scene.",
];

const LEFTMOST: [&str; 12] = [
    "Which sound event lies farthest to the left?",
    "What is the leftmost sound source in this clip?",
    "Identify the sound event positioned most to the left.",
    "Which source sits farthest left in the scene?",
    "Name the sound that comes from the far left.",
    "Which audio event is located leftmost?",
    "What sound source occupies the leftmost position?",
    "Which sound is heard farthest to the left side?",
    "Pick the sound event that is most to the left.",
    "Which source is situated at the extreme left of the scene?",
    "What is the sound event on the far left?",
    "Identify the leftmost audio event in this recording.",
];

const RIGHTMOST: [&str; 12] = [
    "Which sound event lies farthest to the right?",
    "What is the rightmost sound source in this clip?",
    "Identify the sound event positioned most to the right.",
    "Which source sits farthest right in the scene?",
    "Name the sound that comes from the far right.",
    "Which audio event is located rightmost?",
    "What sound source occupies the rightmost position?",
    "Which sound is heard farthest to the right side?",
    "Pick the sound event that is most to the right.",
    "Which source is situated at the extreme right of the scene?",
    "What is the sound event on the far right?",
    "Identify the rightmost audio event in this recording.",
];

const TOPMOST: [&str; 12] = [
    "Which sound event lies highest in the scene?",
    "What is the topmost sound source in this clip?",
    "Identify the sound event positioned highest up.",
    "Which source sits at the greatest elevation?",
    "Name the sound that comes from the highest point.",
    "Which audio event is located topmost?",
    "What sound source occupies the highest position?",
    "Which sound is heard from the most elevated position?",
    "Pick the sound event that is highest overhead.",
    "Which source is situated at the top of the scene?",
    "What is the sound event with the greatest elevation?",
    "Identify the topmost audio event in this recording.",
];

const BOTTOMMOST: [&str; 12] = [
    "Which sound event lies lowest in the scene?",
    "What is the bottommost sound source in this clip?",
    "Identify the sound event positioned lowest down.",
    "Which source sits at the smallest elevation?",
    "Name the sound that comes from the lowest point.",
    "Which audio event is located bottommost?",
    "What sound source occupies the lowest position?",
    "Which sound is heard from the least elevated position?",
    "Pick the sound event that is lowest in the scene.",
    "Which source is situated at the bottom of the scene?",
    "What is the sound event with the smallest elevation?",
    "Identify the bottommost audio event in this recording.",
];

const NEAREST: [&str; 12] = [
    "Which sound event is closest to the microphone?",
    "What is the nearest sound source in this clip?",
    "Identify the sound event at the smallest distance.",
    "Which source sits closest to the listener?",
    "Name the sound that comes from the shortest distance.",
    "Which audio event is located nearest?",
    "What sound source is the least far away?",
    "Which sound is heard from the closest position?",
    "Pick the sound event that is nearest to the microphone.",
    "Which source is situated closest in the scene?",
    "What is the sound event at minimum distance?",
    "Identify the nearest audio event in this recording.",
];

const FARTHEST: [&str; 12] = [
    "Which sound event is most distant from the microphone?",
    "What is the farthest sound source in this clip?",
    "Identify the sound event at the greatest distance.",
    "Which source sits farthest from the listener?",
    "Name the sound that comes from the longest distance.",
    "Which audio event is located farthest away?",
    "What sound source is the most far away?",
    "Which sound is heard from the most distant position?",
    "Pick the sound event that is farthest from the microphone.",
    "Which source is situated farthest in the scene?",
    "What is the sound event at maximum distance?",
    "Identify the farthest audio event in this recording.",
];

const DISTANCE_ASC: [&str; 12] = [
    "Sort the sound events from nearest to farthest.",
    "Rank the audio events by distance, closest first.",
    "List the sound sources in order of increasing distance.",
    "Arrange the sounds starting with the one nearest the microphone.",
    "Order the sound events from the closest to the most distant.",
    "Put the audio events in ascending order of distance.",
    "Sequence the sound sources by how close they are, nearest first.",
    "From nearest to farthest, order the sound events.",
    "Rank the sources by proximity to the microphone, closest first.",
    "Sort all sound events by distance in increasing order.",
    "List the audio events beginning with the nearest one.",
    "Order the sounds by their distance, starting closest.",
];

const DISTANCE_DESC: [&str; 12] = [
    "Sort the sound events from farthest to nearest.",
    "Rank the audio events by distance, most distant first.",
    "List the sound sources in order of decreasing distance.",
    "Arrange the sounds starting with the one farthest from the microphone.",
    "Order the sound events from the most distant to the closest.",
    "Put the audio events in descending order of distance.",
    "Sequence the sound sources by how far they are, farthest first.",
    "From farthest to nearest, order the sound events.",
    "Rank the sources by distance from the microphone, farthest first.",
    "Sort all sound events by distance in decreasing order.",
    "List the audio events beginning with the most distant one.",
    "Order the sounds by their distance, starting farthest.",
];

const ELEVATION_ASC: [&str; 12] = [
    "Sort the sound events from lowest to highest.",
    "Rank the audio events by elevation, bottom first.",
    "List the sound sources in order of increasing elevation.",
    "Arrange the sounds starting with the lowest one.",
    "Order the sound events from the bottom of the scene to the top.",
    "Put the audio events in ascending order of elevation.",
    "Sequence the sound sources by height, lowest first.",
    "From bottommost to topmost, order the sound events.",
    "Rank the sources by elevation angle, smallest first.",
    "Sort all sound events by elevation in increasing order.",
    "List the audio events beginning with the lowest one.",
    "Order the sounds by their elevation, starting at the bottom.",
];

const ELEVATION_DESC: [&str; 12] = [
    "Sort the sound events from highest to lowest.",
    "Rank the audio events by elevation, top first.",
    "List the sound sources in order of decreasing elevation.",
    "Arrange the sounds starting with the highest one.",
    "Order the sound events from the top of the scene to the bottom.",
    "Put the audio events in descending order of elevation.",
    "Sequence the sound sources by height, highest first.",
    "From topmost to bottommost, order the sound events.",
    "Rank the sources by elevation angle, largest first.",
    "Sort all sound events by elevation in decreasing order.",
    "List the audio events beginning with the highest one.",
    "Order the sounds by their elevation, starting at the top.",
];

const AZIMUTH_ASC: [&str; 12] = [
    "Sort the sound events by azimuth from smallest to largest.",
    "Rank the audio events by increasing azimuth angle.",
    "List the sound sources in ascending order of azimuth.",
    "Arrange the sounds starting with the smallest azimuth angle.",
    "Order the sound events by azimuth, lowest angle first.",
    "Put the audio events in increasing order of azimuth.",
    "Sequence the sound sources by azimuth angle, smallest first.",
    "From smallest azimuth to largest, order the sound events.",
    "Rank the sources by their azimuth angle in ascending order.",
    "Sort all sound events by azimuth angle, increasing.",
    "List the audio events beginning with the smallest azimuth.",
    "Order the sounds by azimuth angle, starting with the least.",
];

const AZIMUTH_DESC: [&str; 12] = [
    "Sort the sound events by azimuth from largest to smallest.",
    "Rank the audio events by decreasing azimuth angle.",
    "List the sound sources in descending order of azimuth.",
    "Arrange the sounds starting with the largest azimuth angle.",
    "Order the sound events by azimuth, highest angle first.",
    "Put the audio events in decreasing order of azimuth.",
    "Sequence the sound sources by azimuth angle, largest first.",
    "From largest azimuth to smallest, order the sound events.",
    "Rank the sources by their azimuth angle in descending order.",
    "Sort all sound events by azimuth angle, decreasing.",
    "List the audio events beginning with the largest azimuth.",
    "Order the sounds by azimuth angle, starting with the greatest.",
];

const APPEARANCE: [&str; 12] = [
    "Order the sound events by their onset time, earliest first.",
    "List the sounds in the order they appear.",
    "Sort the audio events chronologically by when they start.",
    "Arrange the sound sources from first to last to appear.",
    "Sequence the sound events by starting time.",
    "In what order do the sound events begin? List them.",
    "Rank the sounds by onset, beginning with the earliest.",
    "Order the audio events according to when they first occur.",
    "List the sound sources by time of first appearance.",
    "Sort the events from the one that starts first to the one that starts last.",
    "Arrange the sounds in chronological order of onset.",
    "From earliest to latest, list when each sound event begins.",
];

/// The template bank for a question subtype. Type I questions share one
/// bank regardless of class.
pub(crate) fn bank_for(qtype: QuestionType, subtype: &str) -> &'static [&'static str] {
    match qtype {
        QuestionType::I => &TYPE1,
        QuestionType::II => &TYPE2_ACTIVE,
        QuestionType::III => match subtype {
            "stationary" => &STATIONARY,
            "moving" => &MOVING,
            "leftmost" => &LEFTMOST,
            "rightmost" => &RIGHTMOST,
            "topmost" => &TOPMOST,
            "bottommost" => &BOTTOMMOST,
            "nearest" => &NEAREST,
            _ => &FARTHEST,
        },
        QuestionType::IV => match subtype {
            "distance_asc" => &DISTANCE_ASC,
            "distance_desc" => &DISTANCE_DESC,
            "elevation_asc" => &ELEVATION_ASC,
            "elevation_desc" => &ELEVATION_DESC,
            "azimuth_asc" => &AZIMUTH_ASC,
            _ => &AZIMUTH_DESC,
        },
        QuestionType::V => &APPEARANCE,
    }
}
