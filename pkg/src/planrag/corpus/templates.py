"""Seeded template content for the synthetic corpus.

Defines the fixed 59-API toolbox, the attribute pools personas are drawn
from, and the per-application item kinds with the query templates attached
to them. Item bodies deliberately carry application vocabulary (so context
text steers tool retrieval), and each store has a non-queryable "digest"
kind packed with the generic words query templates use, which makes purely
lexical ranking genuinely hard on under-specified queries.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .model import Plan, Tool, ToolParam, order_params


def norm_text(s: str) -> str:
    return s.strip().lower()


# --------------------------------------------------------------------------
# Toolbox: 59 APIs. Per-app counts are fixed:
# music 11, google 10, notes 9, mail 8, phonecall 8, calendar 7, reminders 6.
# --------------------------------------------------------------------------

_P = ToolParam

_TOOL_SPECS: list[tuple[str, str, str, list[ToolParam]]] = [
    # calendar (7)
    ("calendar", "create_event",
     "Calendar App's create_event API creates a new calendar event with a title and a date.",
     [_P("title", "title of the event", True),
      _P("date", "date of the event", False),
      _P("time", "start time of the event", False),
      _P("location", "where the event takes place", False)]),
    ("calendar", "search_events",
     "Calendar App's search_events API searches calendar events by title or organizer, "
     "such as meetings, classes, appointments, or dinners.",
     [_P("query", "title words or organizer to look for", True)]),
    ("calendar", "get_next_event",
     "Calendar App's get_next_event API returns the next upcoming event on the calendar.",
     []),
    ("calendar", "update_event",
     "Calendar App's update_event API changes the date or time of an existing calendar event.",
     [_P("query", "title of the event to change", True),
      _P("date", "new date for the event", False)]),
    ("calendar", "delete_event",
     "Calendar App's delete_event API removes an event from the calendar.",
     [_P("query", "title of the event to remove", True)]),
    ("calendar", "check_availability",
     "Calendar App's check_availability API reports whether a given date is open on the calendar.",
     [_P("date", "date to look up", True)]),
    ("calendar", "list_day_events",
     "Calendar App's list_day_events API lists all calendar events on a given date.",
     [_P("date", "date to list events for", True)]),
    # google (10)
    ("google", "search_web",
     "Google App's search_web API runs a web search and returns the top results.",
     [_P("query", "what to search for", True)]),
    ("google", "get_weather",
     "Google App's get_weather API returns the weather forecast for a city.",
     [_P("city", "city to get the forecast for", True)]),
    ("google", "get_directions",
     "Google App's get_directions API returns driving directions to a destination.",
     [_P("destination", "address or place to navigate to", True)]),
    ("google", "check_traffic",
     "Google App's check_traffic API reports traffic conditions on the way to a destination.",
     [_P("destination", "place to check traffic for", True)]),
    ("google", "search_images",
     "Google App's search_images API searches the web for images.",
     [_P("query", "what the images should show", True)]),
    ("google", "search_news",
     "Google App's search_news API searches recent news articles.",
     [_P("query", "news topic to look for", True)]),
    ("google", "translate_text",
     "Google App's translate_text API translates text into a target language.",
     [_P("text", "text to translate", True),
      _P("language", "target language", True)]),
    ("google", "get_place_details",
     "Google App's get_place_details API returns opening hours and contact info for a place.",
     [_P("query", "name of the place", True)]),
    ("google", "search_videos",
     "Google App's search_videos API searches the web for videos.",
     [_P("query", "what the videos should show", True)]),
    ("google", "define_word",
     "Google App's define_word API returns the dictionary definition of a word.",
     [_P("word", "word to define", True)]),
    # mail (8)
    ("mail", "send_email",
     "Mail App's send_email API sends an email message to a recipient.",
     [_P("recipient", "who to send the email to", True),
      _P("subject", "subject line", False),
      _P("body", "text of the email", False)]),
    ("mail", "read_unread_emails",
     "Mail App's read_unread_emails API reads out the unread messages in the mail inbox.",
     []),
    ("mail", "search_emails",
     "Mail App's search_emails API searches the mail inbox for messages matching a subject, "
     "sender, or keyword, such as an invoice, a confirmation, or a follow-up.",
     [_P("query", "subject words, sender, or keyword", True)]),
    ("mail", "reply_email",
     "Mail App's reply_email API replies to an email matching a subject or sender.",
     [_P("query", "subject or sender of the email to reply to", True),
      _P("text", "reply text", False)]),
    ("mail", "forward_email",
     "Mail App's forward_email API forwards an email to another recipient.",
     [_P("query", "subject of the email to forward", True),
      _P("recipient", "who to forward it to", True)]),
    ("mail", "delete_email",
     "Mail App's delete_email API deletes an email from the inbox.",
     [_P("query", "subject of the email to delete", True)]),
    ("mail", "mark_email_read",
     "Mail App's mark_email_read API marks a message in the inbox as read.",
     [_P("query", "subject of the email to mark", True)]),
    ("mail", "flag_email",
     "Mail App's flag_email API flags an important email for follow-up.",
     [_P("query", "subject of the email to flag", True)]),
    # music (11)
    ("music", "play_song",
     "Music App's play_song API plays a specific song by name.",
     [_P("song", "name of the song to play", True)]),
    ("music", "pause_music",
     "Music App's pause_music API pauses the current playback.",
     []),
    ("music", "resume_music",
     "Music App's resume_music API resumes paused playback.",
     []),
    ("music", "skip_track",
     "Music App's skip_track API skips to the following track.",
     []),
    ("music", "search_songs",
     "Music App's search_songs API searches the music library for songs.",
     [_P("query", "song words to look for", True)]),
    ("music", "play_playlist",
     "Music App's play_playlist API plays a saved playlist or mix by name.",
     [_P("playlist", "name of the playlist or mix", True)]),
    ("music", "create_playlist",
     "Music App's create_playlist API creates a new empty playlist.",
     [_P("playlist", "name for the new playlist", True)]),
    ("music", "add_to_playlist",
     "Music App's add_to_playlist API adds a song to an existing playlist.",
     [_P("playlist", "playlist to add to", True),
      _P("song", "song to add", True)]),
    ("music", "play_artist",
     "Music App's play_artist API plays songs by a specific artist.",
     [_P("artist", "artist to play", True)]),
    ("music", "play_album",
     "Music App's play_album API plays a full album.",
     [_P("album", "album to play", True)]),
    ("music", "get_recently_played",
     "Music App's get_recently_played API lists the songs played most recently in the music app.",
     []),
    # reminders (6)
    ("reminders", "create_reminder",
     "Reminders App's create_reminder API creates a new reminder with a title.",
     [_P("title", "what to be reminded about", True),
      _P("date", "when to remind", False)]),
    ("reminders", "search_reminders",
     "Reminders App's search_reminders API searches saved reminders by title words, "
     "such as a class, a bill, or an errand.",
     [_P("query", "title words to look for", True)]),
    ("reminders", "get_due_reminders",
     "Reminders App's get_due_reminders API lists open reminders that are coming due.",
     []),
    ("reminders", "complete_reminder",
     "Reminders App's complete_reminder API marks a reminder as done.",
     [_P("query", "title of the reminder to complete", True)]),
    ("reminders", "delete_reminder",
     "Reminders App's delete_reminder API deletes a reminder.",
     [_P("query", "title of the reminder to delete", True)]),
    ("reminders", "snooze_reminder",
     "Reminders App's snooze_reminder API postpones a reminder.",
     [_P("query", "title of the reminder to snooze", True),
      _P("duration", "how long to postpone", False)]),
    # notes (9)
    ("notes", "create_note",
     "Notes App's create_note API creates a new note with a title and body.",
     [_P("title", "title for the note", True),
      _P("body", "text of the note", False)]),
    ("notes", "read_note",
     "Notes App's read_note API opens a saved note by its title, such as a plan or a list.",
     [_P("title", "exact title of the note", True)]),
    ("notes", "search_notes",
     "Notes App's search_notes API searches notes by keyword or topic, "
     "such as ideas or meeting summaries.",
     [_P("query", "keyword or topic to look for", True)]),
    ("notes", "update_note",
     "Notes App's update_note API rewrites the body of an existing note.",
     [_P("title", "title of the note to update", True),
      _P("body", "new text for the note", False)]),
    ("notes", "delete_note",
     "Notes App's delete_note API deletes a note.",
     [_P("title", "title of the note to delete", True)]),
    ("notes", "list_notes",
     "Notes App's list_notes API lists the titles of all saved notes.",
     []),
    ("notes", "pin_note",
     "Notes App's pin_note API pins a note to the top of the notes list.",
     [_P("title", "title of the note to pin", True)]),
    ("notes", "append_to_note",
     "Notes App's append_to_note API appends text to an existing note.",
     [_P("title", "title of the note", True),
      _P("text", "text to append", True)]),
    ("notes", "share_note",
     "Notes App's share_note API shares a note with a contact.",
     [_P("title", "title of the note to share", True),
      _P("recipient", "who to share it with", True)]),
    # phonecall (8)
    ("phonecall", "make_call",
     "Phonecall App's make_call API starts a phone call to a contact.",
     [_P("contact", "who to call", True)]),
    ("phonecall", "answer_call",
     "Phonecall App's answer_call API answers an incoming phone call.",
     []),
    ("phonecall", "hang_up",
     "Phonecall App's hang_up API ends the ongoing call.",
     []),
    ("phonecall", "play_voicemail",
     "Phonecall App's play_voicemail API plays back new voicemail messages "
     "left in the voicemail inbox after a missed phone call.",
     []),
    ("phonecall", "get_call_history",
     "Phonecall App's get_call_history API lists recent phone calls.",
     [_P("contact", "only show calls with this contact", False)]),
    ("phonecall", "block_number",
     "Phonecall App's block_number API blocks calls from a contact.",
     [_P("contact", "who to block", True)]),
    ("phonecall", "redial_last_number",
     "Phonecall App's redial_last_number API calls the last dialed number again.",
     []),
    ("phonecall", "make_video_call",
     "Phonecall App's make_video_call API starts a video call with a contact.",
     [_P("contact", "who to video call", True)]),
]


def build_toolbox() -> list[Tool]:
    return [Tool(name=name, app=app, description=desc, params=order_params(params))
            for app, name, desc, params in _TOOL_SPECS]


# --------------------------------------------------------------------------
# Attribute pools
# --------------------------------------------------------------------------

PROFESSIONS = ["software developer", "teacher", "nurse", "graphic designer", "chef",
               "accountant", "photographer", "electrician", "journalist", "architect",
               "student", "pharmacist", "musician", "lawyer", "dentist"]
MUSIC_GENRES = ["pop", "rock", "jazz", "classical", "hip hop", "country",
                "electronic", "folk", "blues", "reggae"]
CUISINES = ["italian", "mexican", "japanese", "indian", "thai", "french",
            "greek", "korean", "vietnamese", "spanish"]
SPORTS = ["tennis", "soccer", "basketball", "swimming", "cycling", "running",
          "yoga", "climbing", "golf", "boxing"]
HOBBIES = ["cooking", "swimming", "reading", "painting", "gardening", "photography",
           "chess", "hiking", "knitting", "baking", "birdwatching", "pottery"]
ACTIVITIES = ["guitar", "piano", "yoga", "spanish", "pottery", "salsa", "tennis",
              "swimming", "cooking", "photography", "karate", "violin"]
CONTACTS = ["john", "sarah", "michael", "emma", "david", "olivia", "james", "sophia",
            "daniel", "mia", "robert", "laura", "kevin", "anna", "peter", "grace"]
PROVIDERS = ["dentist", "doctor", "vet", "barber", "optician", "physio"]
ARTISTS = ["luna waves", "the midnight owls", "echo valley", "silver pines",
           "neon harbor", "golden fern", "velvet skyline", "north station",
           "paper lanterns", "wild meadow"]
SONGS = ["river run", "city lights", "morning glow", "fading stars", "ocean drive",
         "quiet storm", "paper moon", "wildflower", "midnight train", "summer rain",
         "glass heart", "northern wind"]
ALBUMS = ["horizons", "reflections", "voyager", "bloom", "afterglow", "monsoon",
          "gravity", "daybreak"]
PLACES = ["riverside park", "downtown gym", "central library", "sunset beach",
          "oak street cafe", "city museum", "harbor market", "maple theater"]
CITIES = ["portland", "austin", "denver", "seattle", "boston", "chicago",
          "nashville", "tucson"]
COMPANIES = ["acme corp", "northwind", "globex", "initech", "umbrella supplies",
             "stellar bank", "brightside energy"]
BILLS = ["electricity", "water", "internet", "rent", "phone", "insurance"]
GROCERIES = ["milk", "eggs", "coffee", "bread", "apples", "pasta", "spinach", "cheese"]
TOPICS = ["budget review", "product launch", "roadmap planning", "quarterly report",
          "design sprint", "hiring plan", "marketing sync", "client onboarding"]
PLAN_NAMES = ["intermittent fasting", "marathon training", "home renovation",
              "holiday savings", "garden layout", "travel itinerary", "meal prep",
              "study schedule"]
IDEA_TOPICS = ["birthday gift", "startup", "vacation", "recipe", "garden",
               "podcast", "renovation"]
MIXES = ["morning", "workout", "chill", "focus", "road trip", "evening"]
MEETING_HOURS = ["9 am", "10 am", "11 am", "2 pm", "3 pm", "4 pm"]


# --------------------------------------------------------------------------
# Item kinds and their query templates
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ItemDraft:
    kind: str
    title: str
    body: str
    tags: dict[str, str]
    slots: dict[str, str]
    subject: str


@dataclass(frozen=True)
class QueryDraft:
    text: str
    tools: tuple[str, ...]
    plan: Plan
    nature: str


@dataclass(frozen=True)
class QueryTemplate:
    nature: str  # "explicit" (lexical overlap) or "implicit" (habit signals only)
    build: "callable"
    weight: float = 1.0


@dataclass(frozen=True)
class ItemKind:
    app: str
    name: str
    weight: float
    make: "callable"
    queries: tuple[QueryTemplate, ...] = field(default_factory=tuple)
    digest: bool = False

    @property
    def queryable(self) -> bool:
        return bool(self.queries)


def _pick(rng: random.Random, pool: list[str]) -> str:
    return pool[rng.randrange(len(pool))]


def _qt(nature, build, weight: float = 1.0):
    return QueryTemplate(nature=nature, build=build, weight=weight)


def _plan(api: str, **args: str) -> Plan:
    return Plan(api=api, args={k: norm_text(v) for k, v in args.items()})


# calendar ------------------------------------------------------------------

def _mk_class_event(rng, ctx):
    activity = _pick(rng, ACTIVITIES)
    contact = _pick(rng, ctx["contacts"])
    return ItemDraft(
        kind="class_event",
        title=f"{activity.title()} Class",
        body=f"Calendar event coming up next: {activity} class with {contact}.",
        tags={"organizer": contact, "activity": activity},
        slots={"activity": activity, "contact": contact},
        subject=activity)


def _mk_meeting_event(rng, ctx):
    topic = _pick(rng, TOPICS)
    contact = _pick(rng, ctx["contacts"])
    hour = _pick(rng, MEETING_HOURS)
    return ItemDraft(
        kind="meeting_event",
        title=f"{topic.title()} Meeting",
        body=f"Calendar event coming up next: meeting about {topic} organized by {contact} at {hour}.",
        tags={"organizer": contact, "topic": topic},
        slots={"topic": topic, "contact": contact},
        subject=topic)


def _mk_appointment(rng, ctx):
    provider = _pick(rng, PROVIDERS)
    place = _pick(rng, PLACES)
    return ItemDraft(
        kind="appointment_event",
        title=f"{provider.title()} Appointment",
        body=f"Calendar event: {provider} appointment at {place}.",
        tags={"location": place},
        slots={"provider": provider, "place": place},
        subject=provider)


def _mk_dinner_event(rng, ctx):
    contact = _pick(rng, ctx["contacts"])
    place = _pick(rng, PLACES)
    return ItemDraft(
        kind="dinner_event",
        title=f"Dinner with {contact.title()}",
        body=f"Calendar event: dinner with {contact} at {place}.",
        tags={"organizer": contact, "location": place},
        slots={"contact": contact, "place": place},
        subject=contact)


def _mk_agenda_digest(rng, ctx):
    return ItemDraft(
        kind="agenda_digest",
        title="Weekly Agenda",
        body="Weekly overview: what do i have on this week, is my time still free today, did anything new come in, any things to check out again, more i should get soon.",
        tags={"category": "overview"},
        slots={},
        subject="agenda")


_CALENDAR_KINDS = (
    ItemKind("calendar", "class_event", 2.2, _mk_class_event, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"When is my next {s['activity']} class?",
            tools=("search_events", "get_next_event", "search_reminders"),
            plan=_plan("search_events", query=f"{s['activity']} class"),
            nature="explicit")),
        _qt("explicit", lambda s: QueryDraft(
            text=f"What time is my {s['activity']} session this week?",
            tools=("search_events", "get_next_event", "check_availability"),
            plan=_plan("search_events", query=f"{s['activity']} class"),
            nature="explicit"), weight=2.5),
        _qt("implicit", lambda s: QueryDraft(
            text="When is my next session?",
            tools=("get_next_event", "search_events", "list_day_events"),
            plan=_plan("get_next_event"),
            nature="implicit")),
    )),
    ItemKind("calendar", "meeting_event", 2.0, _mk_meeting_event, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"What time is the {s['topic'].split()[0]} sync this week?",
            tools=("search_events", "get_next_event", "check_availability"),
            plan=_plan("search_events", query=f"{s['topic']} meeting"),
            nature="explicit"), weight=2.5),
        _qt("explicit", lambda s: QueryDraft(
            text=f"What time is the {s['topic']} meeting?",
            tools=("search_events", "get_next_event", "check_availability"),
            plan=_plan("search_events", query=f"{s['topic']} meeting"),
            nature="explicit")),
        _qt("implicit", lambda s: QueryDraft(
            text="I'm running late.",
            tools=("get_next_event", "search_events", "send_email"),
            plan=_plan("get_next_event"),
            nature="implicit")),
    )),
    ItemKind("calendar", "appointment_event", 1.4, _mk_appointment, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Do I still have the {s['provider']} visit this week?",
            tools=("search_events", "check_availability", "get_next_event"),
            plan=_plan("search_events", query=f"{s['provider']} appointment"),
            nature="explicit"), weight=2.5),
        _qt("explicit", lambda s: QueryDraft(
            text=f"When is my {s['provider']} appointment?",
            tools=("search_events", "check_availability", "get_next_event"),
            plan=_plan("search_events", query=f"{s['provider']} appointment"),
            nature="explicit")),
    )),
    ItemKind("calendar", "dinner_event", 1.4, _mk_dinner_event, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Where is the dinner with {s['contact']}?",
            tools=("search_events", "get_place_details", "get_next_event"),
            plan=_plan("search_events", query=f"dinner with {s['contact']}"),
            nature="explicit")),
    )),
    ItemKind("calendar", "agenda_digest", 1.1, _mk_agenda_digest, digest=True),
)


# reminders -----------------------------------------------------------------

def _mk_class_reminder(rng, ctx):
    activity = _pick(rng, ACTIVITIES)
    return ItemDraft(
        kind="class_reminder",
        title=f"{activity.title()} Class",
        body=f"Reminders app alert: attend {activity} class.",
        tags={"activity": activity, "list": "personal"},
        slots={"activity": activity},
        subject=activity)


def _mk_bill_reminder(rng, ctx):
    bill = _pick(rng, BILLS)
    return ItemDraft(
        kind="bill_reminder",
        title=f"Pay {bill.title()} Bill",
        body=f"Reminders app alert: pay the {bill} bill before the weekend.",
        tags={"category": "finance"},
        slots={"bill": bill},
        subject=bill)


def _mk_callback_reminder(rng, ctx):
    contact = _pick(rng, ctx["contacts"])
    return ItemDraft(
        kind="callback_reminder",
        title=f"Call {contact.title()}",
        body=f"Reminders app alert: call {contact} back about plans.",
        tags={"contact": contact},
        slots={"contact": contact},
        subject=contact)


def _mk_errand_reminder(rng, ctx):
    grocery = _pick(rng, GROCERIES)
    return ItemDraft(
        kind="errand_reminder",
        title=f"Buy {grocery.title()}",
        body=f"Reminders app alert: buy {grocery} from the store.",
        tags={"category": "shopping"},
        slots={"grocery": grocery},
        subject=grocery)


def _mk_checklist_digest(rng, ctx):
    return ItemDraft(
        kind="checklist_digest",
        title="Weekly Checklist",
        body="Open items overview: what do i have on this week, is my time still free today, did anything new come in, any things to check out again, more i should get soon.",
        tags={"category": "overview"},
        slots={},
        subject="checklist")


_REMINDERS_KINDS = (
    ItemKind("reminders", "class_reminder", 2.0, _mk_class_reminder, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"What time is my {s['activity']} lesson again this week?",
            tools=("search_reminders", "search_events", "search_notes"),
            plan=_plan("search_reminders", query=f"{s['activity']} class"),
            nature="explicit"), weight=2.5),
        _qt("explicit", lambda s: QueryDraft(
            text=f"When is my next {s['activity']} lesson?",
            tools=("search_reminders", "search_events", "search_notes"),
            plan=_plan("search_reminders", query=f"{s['activity']} class"),
            nature="explicit")),
        _qt("explicit", lambda s: QueryDraft(
            text=f"Do I still have {s['activity']} class this week?",
            tools=("search_reminders", "search_events", "get_due_reminders"),
            plan=_plan("search_reminders", query=f"{s['activity']} class"),
            nature="explicit")),
        _qt("implicit", lambda s: QueryDraft(
            text="What have I got coming due this week?",
            tools=("get_due_reminders", "search_reminders", "get_next_event"),
            plan=_plan("get_due_reminders"),
            nature="implicit")),
    )),
    ItemKind("reminders", "bill_reminder", 1.5, _mk_bill_reminder, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Is the {s['bill']} payment still on my plate this week?",
            tools=("search_reminders", "complete_reminder", "search_emails"),
            plan=_plan("search_reminders", query=f"pay {s['bill']} bill"),
            nature="explicit"), weight=2.5),
        _qt("explicit", lambda s: QueryDraft(
            text=f"Did I pay the {s['bill']} bill?",
            tools=("search_reminders", "complete_reminder", "search_emails"),
            plan=_plan("search_reminders", query=f"pay {s['bill']} bill"),
            nature="explicit")),
        _qt("implicit", lambda s: QueryDraft(
            text="Anything coming due I should deal with?",
            tools=("get_due_reminders", "search_reminders", "read_unread_emails"),
            plan=_plan("get_due_reminders"),
            nature="implicit")),
    )),
    ItemKind("reminders", "callback_reminder", 1.4, _mk_callback_reminder, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Do I need to call {s['contact']} back?",
            tools=("search_reminders", "make_call", "get_call_history"),
            plan=_plan("search_reminders", query=f"call {s['contact']}"),
            nature="explicit")),
    )),
    ItemKind("reminders", "errand_reminder", 1.4, _mk_errand_reminder, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Is {s['grocery']} still on my shopping list?",
            tools=("search_reminders", "search_notes", "complete_reminder"),
            plan=_plan("search_reminders", query=f"buy {s['grocery']}"),
            nature="explicit")),
    )),
    ItemKind("reminders", "checklist_digest", 0.9, _mk_checklist_digest, digest=True),
)


# notes ---------------------------------------------------------------------

def _mk_plan_note(rng, ctx):
    plan_name = _pick(rng, PLAN_NAMES)
    return ItemDraft(
        kind="plan_note",
        title=f"{plan_name.title()} Plan",
        body=f"Notes app entry: details of the {plan_name} plan.",
        tags={"category": "plans"},
        slots={"plan_name": plan_name, "plan_word": plan_name.split()[-1]},
        subject=plan_name)


def _mk_idea_note(rng, ctx):
    topic = _pick(rng, IDEA_TOPICS)
    return ItemDraft(
        kind="idea_note",
        title=f"{topic.title()} Ideas",
        body=f"Notes app entry: brainstorm of {topic} ideas.",
        tags={"topic": topic},
        slots={"topic": topic},
        subject=topic)


def _mk_shopping_note(rng, ctx):
    picks = rng.sample(GROCERIES, 3)
    return ItemDraft(
        kind="shopping_note",
        title="Shopping List",
        body=f"Notes app entry: shopping list with {picks[0]}, {picks[1]}, and {picks[2]}.",
        tags={"category": "shopping"},
        slots={},
        subject="shopping list")


def _mk_meeting_note(rng, ctx):
    topic = _pick(rng, TOPICS)
    return ItemDraft(
        kind="meeting_note",
        title=f"{topic.title()} Notes",
        body=f"Notes app entry: what was said in the {topic} discussion.",
        tags={"topic": topic},
        slots={"topic": topic},
        subject=topic)


def _mk_scratch_digest(rng, ctx):
    return ItemDraft(
        kind="scratch_digest",
        title="Scratchpad",
        body="Jotted overview: what do i have on this week, is my time still free today, did anything new come in, any things to check out again, more i should get soon.",
        tags={"category": "overview"},
        slots={},
        subject="scratchpad")


_NOTES_KINDS = (
    ItemKind("notes", "plan_note", 1.8, _mk_plan_note, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"I need to check my {s['plan_word']} plan again.",
            tools=("read_note", "search_notes", "search_emails"),
            plan=_plan("read_note", title=f"{s['plan_name']} plan"),
            nature="explicit")),
        _qt("explicit", lambda s: QueryDraft(
            text=f"What was the {s['plan_word']} routine I wrote down this week?",
            tools=("read_note", "search_notes", "list_notes"),
            plan=_plan("read_note", title=f"{s['plan_name']} plan"),
            nature="explicit"), weight=2.5),
    )),
    ItemKind("notes", "idea_note", 1.4, _mk_idea_note, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Anything new on {s['topic']} i can check this week?",
            tools=("search_notes", "read_note", "pin_note"),
            plan=_plan("search_notes", query=f"{s['topic']} ideas"),
            nature="explicit"), weight=2.5),
        _qt("explicit", lambda s: QueryDraft(
            text=f"Can you pull up my {s['topic']} ideas?",
            tools=("search_notes", "read_note", "pin_note"),
            plan=_plan("search_notes", query=f"{s['topic']} ideas"),
            nature="explicit")),
    )),
    ItemKind("notes", "shopping_note", 1.0, _mk_shopping_note, (
        _qt("explicit", lambda s: QueryDraft(
            text="What is on my shopping list?",
            tools=("read_note", "search_notes", "search_reminders"),
            plan=_plan("read_note", title="shopping list"),
            nature="explicit")),
    )),
    ItemKind("notes", "meeting_note", 1.4, _mk_meeting_note, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"What did I write down about {s['topic']}?",
            tools=("search_notes", "read_note", "search_events"),
            plan=_plan("search_notes", query=f"{s['topic']} notes"),
            nature="explicit")),
    )),
    ItemKind("notes", "scratch_digest", 0.9, _mk_scratch_digest, digest=True),
)


# mail ----------------------------------------------------------------------

def _mk_invoice_mail(rng, ctx):
    company = _pick(rng, COMPANIES)
    return ItemDraft(
        kind="invoice_mail",
        title=f"Invoice from {company.title()}",
        body=f"Email in the mail inbox from {company} billing: your invoice is ready.",
        tags={"sender": company},
        slots={"company": company},
        subject=company)


def _mk_flight_mail(rng, ctx):
    code = f"qx{rng.randrange(10, 99)}{chr(ord('a') + rng.randrange(26))}"
    city = _pick(rng, CITIES)
    return ItemDraft(
        kind="flight_mail",
        title=f"Flight Confirmation {code.upper()}",
        body=f"Email in the mail inbox: flight booking confirmation for your trip to {city}.",
        tags={"category": "travel"},
        slots={"code": code, "city": city},
        subject=code)


def _mk_followup_mail(rng, ctx):
    topic = _pick(rng, TOPICS)
    contact = _pick(rng, ctx["contacts"])
    return ItemDraft(
        kind="followup_mail",
        title=f"Follow-up: {topic.title()}",
        body=f"Email in the mail inbox from {contact} following up on the {topic} meeting.",
        tags={"sender": contact, "topic": topic},
        slots={"topic": topic, "contact": contact},
        subject=topic)


def _mk_newsletter_mail(rng, ctx):
    company = _pick(rng, COMPANIES)
    return ItemDraft(
        kind="newsletter_mail",
        title=f"{company.title()} Newsletter",
        body=f"Email in the mail inbox: the weekly newsletter from {company} with new offers.",
        tags={"sender": company},
        slots={"company": company},
        subject=company)


def _mk_mail_digest(rng, ctx):
    return ItemDraft(
        kind="mail_digest",
        title="Daily Digest",
        body="Morning overview: what do i have on this week, is my time still free today, did anything new come in, any things to check out again, more i should get soon.",
        tags={"category": "overview"},
        slots={},
        subject="digest")


_MAIL_KINDS = (
    ItemKind("mail", "invoice_mail", 1.6, _mk_invoice_mail, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Anything from {s['company'].split()[0]} i still need to settle this week?",
            tools=("search_emails", "flag_email", "search_web"),
            plan=_plan("search_emails", query=f"invoice from {s['company']}"),
            nature="explicit"), weight=2.5),
        _qt("explicit", lambda s: QueryDraft(
            text=f"Find the invoice from {s['company']}.",
            tools=("search_emails", "flag_email", "search_web"),
            plan=_plan("search_emails", query=f"invoice from {s['company']}"),
            nature="explicit")),
    )),
    ItemKind("mail", "flight_mail", 1.0, _mk_flight_mail, (
        _qt("explicit", lambda s: QueryDraft(
            text="When does my flight leave?",
            tools=("search_emails", "read_unread_emails", "search_web"),
            plan=_plan("search_emails", query=f"flight confirmation {s['code']}"),
            nature="explicit")),
    )),
    ItemKind("mail", "followup_mail", 1.5, _mk_followup_mail, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Did {s['contact']} reply about the {s['topic']}?",
            tools=("search_emails", "reply_email", "search_events"),
            plan=_plan("search_emails", query=f"follow-up: {s['topic']}"),
            nature="explicit")),
    )),
    ItemKind("mail", "newsletter_mail", 1.2, _mk_newsletter_mail),
    ItemKind("mail", "mail_digest", 0.7, _mk_mail_digest, digest=True),
)


# music ---------------------------------------------------------------------

def _mk_played_song(rng, ctx):
    song = _pick(rng, SONGS)
    artist = _pick(rng, ARTISTS)
    album = _pick(rng, ALBUMS)
    return ItemDraft(
        kind="played_song",
        title=song.title(),
        body=f"Music app: played the song {song} by {artist}.",
        tags={"artist": artist, "genre": ctx["genre"]},
        slots={"song": song, "artist": artist, "album": album},
        subject=song)


def _mk_playlist(rng, ctx):
    mix = _pick(rng, MIXES)
    return ItemDraft(
        kind="playlist_item",
        title=f"{mix.title()} Mix",
        body=f"Music app: saved playlist {mix} mix with {ctx['genre']} tracks.",
        tags={"genre": ctx["genre"]},
        slots={"mix": mix},
        subject=mix)


def _mk_music_digest(rng, ctx):
    return ItemDraft(
        kind="release_digest",
        title="New Releases",
        body="Listening overview: what do i have on this week, is my time still free today, did anything new come in, any things to check out again, more i should get soon.",
        tags={"category": "overview"},
        slots={},
        subject="releases")


_MUSIC_KINDS = (
    ItemKind("music", "played_song", 2.6, _mk_played_song, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Play {s['song']} again.",
            tools=("play_song", "search_songs", "play_artist"),
            plan=_plan("play_song", song=s["song"]),
            nature="explicit")),
        _qt("explicit", lambda s: QueryDraft(
            text=f"Put on something by {s['artist']}.",
            tools=("play_artist", "play_song", "search_songs"),
            plan=_plan("play_artist", artist=s["artist"]),
            nature="explicit")),
        _qt("implicit", lambda s: QueryDraft(
            text="What did I have on this morning?",
            tools=("get_recently_played", "resume_music", "search_songs"),
            plan=_plan("get_recently_played"),
            nature="implicit")),
    )),
    ItemKind("music", "playlist_item", 1.3, _mk_playlist, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Play my {s['mix']} mix.",
            tools=("play_playlist", "search_songs", "play_artist"),
            plan=_plan("play_playlist", playlist=f"{s['mix']} mix"),
            nature="explicit")),
    )),
    ItemKind("music", "release_digest", 0.8, _mk_music_digest, digest=True),
)


# google --------------------------------------------------------------------

def _mk_restaurant_search(rng, ctx):
    cuisine = ctx["cuisine"]
    city = _pick(rng, CITIES)
    return ItemDraft(
        kind="restaurant_search",
        title=f"Best {cuisine.title()} Restaurants",
        body=f"Google web search: best {cuisine} restaurants near {city}.",
        tags={"category": "food", "city": city},
        slots={"cuisine": cuisine, "city": city},
        subject=cuisine)


def _mk_weather_search(rng, ctx):
    city = _pick(rng, CITIES)
    return ItemDraft(
        kind="weather_search",
        title=f"Weather in {city.title()}",
        body=f"Google web search: weather forecast for {city} this weekend.",
        tags={"city": city},
        slots={"city": city},
        subject=city)


def _mk_directions_search(rng, ctx):
    place = _pick(rng, PLACES)
    return ItemDraft(
        kind="directions_search",
        title=f"Directions to {place.title()}",
        body=f"Google web search: driving directions to {place}.",
        tags={"destination": place},
        slots={"place": place},
        subject=place)


def _mk_howto_search(rng, ctx):
    hobby = _pick(rng, HOBBIES)
    return ItemDraft(
        kind="howto_search",
        title=f"{hobby.title()} Tutorials",
        body=f"Google web search: beginner {hobby} tutorials for getting started.",
        tags={"category": "learning"},
        slots={"hobby": hobby},
        subject=hobby)


def _mk_news_search(rng, ctx):
    topic = _pick(rng, TOPICS)
    return ItemDraft(
        kind="news_search",
        title=f"{topic.title()} News",
        body=f"Google web search: latest news about {topic}.",
        tags={"category": "news"},
        slots={"topic": topic},
        subject=topic)


def _mk_trending_digest(rng, ctx):
    return ItemDraft(
        kind="trending_digest",
        title="Trending Searches",
        body="Browsing overview: what do i have on this week, is my time still free today, did anything new come in, any things to check out again, more i should get soon.",
        tags={"category": "overview"},
        slots={},
        subject="trending")


_GOOGLE_KINDS = (
    ItemKind("google", "restaurant_search", 1.5, _mk_restaurant_search, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Any good {s['cuisine']} spots i should check out this week?",
            tools=("search_web", "get_place_details", "get_directions"),
            plan=_plan("search_web", query=f"best {s['cuisine']} restaurants"),
            nature="explicit"), weight=2.5),
        _qt("explicit", lambda s: QueryDraft(
            text=f"Find that {s['cuisine']} place I looked for.",
            tools=("search_web", "get_place_details", "get_directions"),
            plan=_plan("search_web", query=f"best {s['cuisine']} restaurants"),
            nature="explicit")),
    )),
    ItemKind("google", "weather_search", 1.4, _mk_weather_search, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Will it rain in {s['city']} today?",
            tools=("get_weather", "search_web", "check_traffic"),
            plan=_plan("get_weather", city=s["city"]),
            nature="explicit")),
    )),
    ItemKind("google", "directions_search", 1.4, _mk_directions_search, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"How do I get to {s['place']}?",
            tools=("get_directions", "check_traffic", "search_web"),
            plan=_plan("get_directions", destination=s["place"]),
            nature="explicit")),
    )),
    ItemKind("google", "howto_search", 1.8, _mk_howto_search, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Any new {s['hobby']} guides from this week?",
            tools=("search_web", "search_videos", "search_notes"),
            plan=_plan("search_web", query=f"{s['hobby']} tutorials"),
            nature="explicit")),
    )),
    ItemKind("google", "news_search", 1.5, _mk_news_search),
    ItemKind("google", "trending_digest", 1.2, _mk_trending_digest, digest=True),
)


# phonecall -----------------------------------------------------------------

def _mk_call_log(rng, ctx):
    contact = _pick(rng, ctx["contacts"])
    minutes = rng.randrange(2, 45)
    direction = "outgoing" if rng.random() < 0.5 else "incoming"
    return ItemDraft(
        kind="call_log",
        title=f"Call with {contact.title()}",
        body=f"Phonecall log: {direction} phone call with {contact}, lasted {minutes} minutes.",
        tags={"contact": contact, "direction": direction},
        slots={"contact": contact},
        subject=contact)


def _mk_missed_call(rng, ctx):
    contact = _pick(rng, ctx["contacts"])
    return ItemDraft(
        kind="missed_call",
        title=f"Missed Call from {contact.title()}",
        body=f"Phonecall log: missed phone call from {contact}.",
        tags={"contact": contact},
        slots={"contact": contact},
        subject=contact)


def _mk_call_digest(rng, ctx):
    return ItemDraft(
        kind="activity_digest",
        title="Recent Activity",
        body="Catch up overview: what do i have on this week, is my time still free today, did anything new come in, any things to check out again, more i should get soon.",
        tags={"category": "overview"},
        slots={},
        subject="activity")


_PHONECALL_KINDS = (
    ItemKind("phonecall", "call_log", 1.8, _mk_call_log, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"When did I last call {s['contact']}?",
            tools=("get_call_history", "make_call", "search_reminders"),
            plan=_plan("get_call_history"),
            nature="explicit")),
        _qt("explicit", lambda s: QueryDraft(
            text=f"Call {s['contact']} back for me.",
            tools=("make_call", "get_call_history", "make_video_call"),
            plan=_plan("make_call", contact=s["contact"]),
            nature="explicit")),
        _qt("implicit", lambda s: QueryDraft(
            text="Anyone leave me a voicemail?",
            tools=("play_voicemail", "get_call_history", "redial_last_number"),
            plan=_plan("play_voicemail"),
            nature="implicit")),
    )),
    ItemKind("phonecall", "missed_call", 1.4, _mk_missed_call, (
        _qt("explicit", lambda s: QueryDraft(
            text=f"Did I miss a call from {s['contact']}?",
            tools=("make_call", "get_call_history", "play_voicemail"),
            plan=_plan("make_call", contact=s["contact"]),
            nature="explicit")),
        _qt("implicit", lambda s: QueryDraft(
            text="Anything urgent I should get back to?",
            tools=("play_voicemail", "get_call_history", "read_unread_emails"),
            plan=_plan("play_voicemail"),
            nature="implicit")),
    )),
    ItemKind("phonecall", "activity_digest", 0.8, _mk_call_digest, digest=True),
)


KINDS_BY_APP: dict[str, tuple[ItemKind, ...]] = {
    "calendar": _CALENDAR_KINDS,
    "reminders": _REMINDERS_KINDS,
    "notes": _NOTES_KINDS,
    "mail": _MAIL_KINDS,
    "music": _MUSIC_KINDS,
    "google": _GOOGLE_KINDS,
    "phonecall": _PHONECALL_KINDS,
}


def make_persona_context(rng: random.Random) -> dict:
    """Attribute bundle shared by a persona's item templates."""
    return {
        "contacts": rng.sample(CONTACTS, 5),
        "genre": _pick(rng, MUSIC_GENRES),
        "cuisine": _pick(rng, CUISINES),
    }
